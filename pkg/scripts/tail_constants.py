"""Three estimates of the tail constant C_M for a law given on the command line.

    python scripts/tail_constants.py --mean-log-a -0.25 --var-log-a 1.0
"""
import argparse

from perpetuity_fpt import estimators as E
from perpetuity_fpt.model import build_law
from perpetuity_fpt.rng import DEFAULT_SEED


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--mean-log-a", type=float, default=-0.25)
    ap.add_argument("--var-log-a", type=float, default=1.0)
    ap.add_argument("--n-samples", type=int, default=100_000)
    ap.add_argument("--n-run", type=int, default=10**7)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    args = ap.parse_args()
    law = build_law("lognormal_A_const_B", mean_log_a=args.mean_log_a, var_log_a=args.var_log_a)
    g = E.estimate_CM_goldie(law, n_samples=args.n_samples, seed=args.seed)
    c = E.estimate_CM_cesaro(law, 512, args.n_samples, seed=args.seed)
    crude = E.estimate_CM_cesaro(law, 512, args.n_samples, seed=args.seed, control_variate=False)
    fit = E.tail_fit(law, args.n_run, seed=args.seed)
    print(f"goldie            {g.value:.4f} +- {g.stderr:.4f}")
    print(f"cesaro (cv)       {c.value:.4f} +- {c.stderr:.4f}   n/2 value {c.diagnostics['half_n_value']:.4f}")
    print(f"cesaro (crude)    {crude.value:.4f} +- {crude.stderr:.4f}")
    print(f"tail fit          xi_hat={fit.xi_hat:.4f} C_hat={fit.C_hat:.4f}")
    for row in fit.table:
        print(f"  u={row['u']:.4g} p={row['p_hat']:.3e} u^xi_hat p={row['scaled']:.4f}")


if __name__ == "__main__":
    main()
