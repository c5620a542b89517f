"""Ratio P{T_u <= rho} / P{T_u <= 3 rho} as u grows; the limit is 1/2.

    python scripts/critical_halving.py --n-samples 1000000
"""
import argparse

from perpetuity_fpt import cgf
from perpetuity_fpt import estimators as E
from perpetuity_fpt.model import build_law
from perpetuity_fpt.rng import DEFAULT_SEED


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-samples", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    law = build_law("lognormal_A_const_B", mean_log_a=-0.25, var_log_a=1.0)
    xi = cgf.solve_xi(law)
    rho = 1 / cgf.mu(law, xi)
    print("u,p_rho,se_rho,p_3rho,se_3rho,ratio")
    for u in (1e2, 1e3, 1e4, 1e5, 1e6):
        kw = dict(method=E.IMPORTANCE, alpha=xi, threads=args.threads)
        a = E.prob_passage(law, u, rho, args.n_samples, seed=args.seed, **kw)
        b = E.prob_passage(law, u, 3 * rho, args.n_samples, seed=args.seed + 1, **kw)
        print(f"{u:.0e},{a.value:.6e},{a.stderr:.2e},{b.value:.6e},{b.stderr:.2e},{a.value / b.value:.4f}")


if __name__ == "__main__":
    main()
