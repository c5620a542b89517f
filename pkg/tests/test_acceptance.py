"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line with the measured values
and wall time.  Run ``python tests/test_acceptance.py`` to get just the
summary lines without pytest.
"""
import math
import time

import numpy as np
import pytest

from perpetuity_fpt import cgf
from perpetuity_fpt import estimators as E
from perpetuity_fpt.model import build_law, scale_law
from perpetuity_fpt.process import reversal_duality_check
from perpetuity_fpt.rng import DEFAULT_SEED, stream
from perpetuity_fpt.tilt import tilt

SEED = DEFAULT_SEED
LN = build_law("lognormal_A_const_B", mean_log_a=-0.25, var_log_a=1.0)
TWO_POINT = build_law("two_point_A_const_B", a_atoms=[2.0, 0.5], probs=[0.25, 0.75])


def _report(number, title, checks, elapsed, budget, detail):
    ok = all(checks) and elapsed < budget
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2} {title}: {detail} [{elapsed:.2f}s < {budget:g}s]"
    return ok, line


def criterion_1():
    t0 = time.perf_counter()
    xi = cgf.solve_xi(LN)
    rho = 1 / cgf.mu(LN, xi)
    rates = [cgf.rate_function(LN, t) for t in (2.0, 4.0, 8.0)]
    el = time.perf_counter() - t0
    checks = [
        abs(xi - 0.5) <= 1e-10,
        abs(rho - 4) <= 1e-8,
        abs(rates[0] - 0.5625) <= 1e-8,
        abs(rates[2] - 0.5625) <= 1e-8,
        abs(rates[1] - 0.5) <= 1e-8,
    ]
    return _report(1, "root/rate oracle", checks, el, 1.0, f"xi={xi:.12g} rho={rho:.12g} I={rates}")


def criterion_2():
    t0 = time.perf_counter()
    xi = cgf.solve_xi(TWO_POINT)
    a, _, p = tilt(TWO_POINT, xi).law.atoms()
    p2 = float(p[a == 2.0][0])
    rho = 1 / cgf.mu(TWO_POINT, xi)
    el = time.perf_counter() - t0
    checks = [abs(xi - math.log2(3)) <= 1e-10, abs(p2 - 0.75) <= 1e-12, abs(rho - 1 / (0.5 * math.log(2))) <= 1e-8]
    return _report(2, "two-point oracle", checks, el, 1.0, f"xi={xi:.12g} P_xi(A=2)={p2:.15g} rho={rho:.12g}")


def criterion_3():
    t0 = time.perf_counter()
    exact = E.prob_passage(TWO_POINT, 5.0, 2.0, method=E.ENUMERATION).value
    e = E.prob_passage(TWO_POINT, 5.0, 2.0, 100_000, method=E.IMPORTANCE, seed=SEED)
    el = time.perf_counter() - t0
    zscore = abs(e.value - exact) / e.stderr
    checks = [exact == 0.0625, zscore <= 4]
    return _report(3, "IS unbiasedness", checks, el, 10.0,
                   f"exact={exact} IS={e.value:.6g}+-{e.stderr:.2g} |z|={zscore:.2f} ess={e.effective_sample_size:.0f}")


def criterion_4():
    t0 = time.perf_counter()
    worst = 0.0
    for law in (LN, TWO_POINT):
        for u in (5.0, 20.0, 100.0):
            for tau in (1.0, 2.0, 3.0):
                a = E.prob_passage(law, u, tau, 10**6, seed=SEED)
                b = E.prob_exceedance_forward(law, u, tau, 10**6, seed=SEED)
                se = math.hypot(a.stderr, b.stderr)
                worst = max(worst, abs(a.value - b.value) / se if se > 0 else 0.0)
    rng = stream(SEED, 99)
    laws = (LN, TWO_POINT)
    fails = 0
    for k in range(10**4):
        n = int(rng.integers(1, 65))
        a, b = laws[k % 2].sample(rng, n)
        b = b - 1.5 * rng.random(n)
        fails += not reversal_duality_check(list(zip(a, b)))
    el = time.perf_counter() - t0
    checks = [worst <= 3, fails == 0]
    return _report(4, "duality", checks, el, 120.0, f"max |z| over 2x3x3 grid={worst:.2f}; pathwise failures={fails}/10000")


def criterion_5():
    t0 = time.perf_counter()
    r100 = E.petrov_tail(LN, 100, 0.25) / E.gaussian_walk_tail(LN, 100, 0.25)
    r1000 = E.petrov_tail(LN, 1000, 0.25) / E.gaussian_walk_tail(LN, 1000, 0.25)
    el = time.perf_counter() - t0
    checks = [0.95 <= r100 <= 1.10, 0.99 <= r1000 <= 1.01]
    return _report(5, "Petrov sharpness", checks, el, 1.0, f"ratio(n=100)={r100:.5f} ratio(n=1000)={r1000:.5f}")


_TAIL = {}


def _tail_fit():
    if "fit" not in _TAIL:
        t0 = time.perf_counter()
        _TAIL["fit"] = E.tail_fit(LN, 10**7, seed=SEED)
        _TAIL["time"] = time.perf_counter() - t0
    return _TAIL["fit"], _TAIL["time"]


def criterion_6():
    fit, el = _tail_fit()
    scaled = [r["scaled"] for r in fit.table if not r["dropped"]]
    spread = max(scaled) / min(scaled)
    checks = [0.45 <= fit.xi_hat <= 0.55, spread <= 1.3]
    return _report(6, "tail exponent", checks, el, 120.0, f"xi_hat={fit.xi_hat:.4f} spread of u^xi_hat P_hat={spread:.3f}")


def criterion_7():
    t0 = time.perf_counter()
    g = E.estimate_CM_goldie(LN, n_samples=100_000, seed=SEED)
    c = E.estimate_CM_cesaro(LN, 512, 100_000, seed=SEED)
    fit, tail_time = _tail_fit()
    el = time.perf_counter() - t0 + tail_time
    rel = abs(g.value / c.value - 1)
    fg = max(g.value, fit.C_hat) / min(g.value, fit.C_hat)
    fc = max(c.value, fit.C_hat) / min(c.value, fit.C_hat)
    checks = [rel <= 0.25, fg <= 1.5, fc <= 1.5]
    return _report(7, "constant consistency", checks, el, 180.0,
                   f"goldie={g.value:.4f} cesaro={c.value:.4f} (rel {rel:.3f}); C_hat={fit.C_hat:.4f} "
                   f"factors {fg:.3f}, {fc:.3f}")


def criterion_8():
    t0 = time.perf_counter()
    worst = math.inf
    for n in (2, 5, 10, 20):
        for u in (10.0, 1e2, 1e3, 1e4):
            est = E.prob_ybar_exceeds(LN, n, u, 10**6, seed=SEED)
            bound = E.chebyshev_bound(LN, 0.5, 0.1, n, u)
            worst = min(worst, bound - (est.value - 3 * est.stderr))
    el = time.perf_counter() - t0
    return _report(8, "bound domination", [worst >= 0], el, 60.0, f"min(bound - (est - 3 se)) over 4x4 grid={worst:.3g}")


def criterion_9():
    t0 = time.perf_counter()
    res = [E.conditional_concentration(LN, u, 100_000, seed=SEED) for u in (1e2, 1e3, 1e4)]
    el = time.perf_counter() - t0
    rho = res[-1]["rho"]
    med = res[-1]["median"]
    mass = [r["out_of_window_mass"] for r in res]
    checks = [0.9 * rho <= med <= 1.1 * rho, mass[0] > mass[1] > mass[2]]
    return _report(9, "conditional concentration", checks, el, 120.0,
                   f"median T_u at u=1e4 = {med:.3f} (window [{0.9 * rho:.2f}, {1.1 * rho:.2f}]); "
                   f"out-of-window mass {[round(m, 4) for m in mass]}")


def criterion_10():
    t0 = time.perf_counter()
    xi = cgf.solve_xi(LN)
    rho = 1 / cgf.mu(LN, xi)
    a = E.prob_passage(LN, 1e4, rho, 10**7, method=E.IMPORTANCE, alpha=xi, seed=SEED)
    b = E.prob_passage(LN, 1e4, 3 * rho, 10**7, method=E.IMPORTANCE, alpha=xi, seed=SEED + 1)
    el = time.perf_counter() - t0
    ratio = a.value / b.value
    return _report(10, "critical halving", [0.35 <= ratio <= 0.65], el, 300.0,
                   f"P(T<=rho)={a.value:.5g} P(T<=3rho)={b.value:.5g} ratio={ratio:.4f}")


def criterion_11():
    t0 = time.perf_counter()
    rep = cgf.regime_report(LN, 8.0)
    witness_ok = rep.count2_witness is not None and cgf.Lambda(LN, rep.count2_witness) < cgf.Lambda(LN, 0.375)
    scaled = cgf.regime_report(scale_law(LN, math.exp(3)), alpha=1.5)
    el = time.perf_counter() - t0
    checks = [
        not rep.count1_holds,
        rep.count2_holds,
        witness_ok,
        abs(rep.count2_witness - 0.25) < 1e-6,
        scaled.count1_holds,
        abs(scaled.count1_gap - 0.5) <= 1e-9,
    ]
    return _report(11, "regime ledger", checks, el, 1.0,
                   f"tau=8: count1={rep.count1_holds} count2={rep.count2_holds} witness={rep.count2_witness:.6f}; "
                   f"scaled: count1={scaled.count1_holds} gap={scaled.count1_gap:.12g}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8,
            criterion_9, criterion_10, criterion_11]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{k}" for k in range(1, 12)])
def test_criterion(criterion, capsys):
    ok, line = criterion()
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    for _, line in results:
        print(line)
    print(f"{sum(ok for ok, _ in results)}/{len(results)} criteria pass")
