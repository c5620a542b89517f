"""Generating functions of log A and the large-deviation quantities built on them.

Notation follows the code, not the literature: ``Lambda(alpha) = log E[A**alpha]``,
``mu = Lambda'``, ``sigma2 = Lambda''``, ``xi`` the positive root of ``Lambda``,
``rho = 1 / mu(xi)``, ``alpha(tau)`` the solution of ``mu(alpha) = 1 / tau`` and
``I(tau) = alpha - tau * Lambda(alpha)``.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate, optimize
from scipy.special import logsumexp

from .errors import DomainError, NoRootError, NoSolutionError, NumericEvaluationError, PreconditionError

QUAD_RTOL = 1e-10
PROBE_LIMIT = 2.0**12
CRITICAL_RTOL = 1e-9

SMALL_TIME = "small_time"
CRITICAL = "critical"
LARGE_TIME = "large_time"


@dataclass(frozen=True)
class CgfProfile:
    alpha: float
    lam: float
    Lambda: float
    lambda_B: float
    Lambda_B: float
    mu: float
    sigma2: float
    in_domain: bool


@dataclass(frozen=True)
class AsymptoticSummary:
    xi: float
    rho: float
    tau: float
    alpha_tau: float
    I_tau: float
    regime: str


@dataclass(frozen=True)
class RegimeReport:
    tau: float
    alpha: float
    count1_gap: float
    count1_holds: bool
    count2_witness: Optional[float]
    count2_holds: bool
    exponent_gap: float
    exponent_beta: Optional[float]
    varrho: float
    applicable: bool


# -- family kernels --------------------------------------------------------


def _quad(fn, lo, hi, what, scale=0.0):
    points = [1.0] if lo < 1.0 < hi else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(fn, lo, hi, epsabs=QUAD_RTOL * scale, epsrel=QUAD_RTOL, limit=200, points=points)
    if not math.isfinite(val) or err > 10 * max(QUAD_RTOL * abs(val), QUAD_RTOL * scale, 1e-300):
        raise NumericEvaluationError(
            f"quadrature for {what} did not converge", err / max(abs(val), scale, 1e-300)
        )
    return val


def _density_moments(law, alpha):
    """Lambda, mu, sigma2 of log A for the bounded-density family by quadrature."""
    p = law.params
    lo, hi = p["a_lo"], p["a_hi"]
    shift = alpha * math.log(hi if alpha > 0 else lo)

    def w(a):
        return math.exp(alpha * math.log(a) - shift) * float(law.a_density(a))

    z = _quad(w, lo, hi, f"lambda({alpha})")
    span = max(abs(math.log(lo)), abs(math.log(hi)))
    m1 = _quad(lambda a: math.log(a) * w(a), lo, hi, f"mu({alpha})", z * span) / z
    m2 = _quad(lambda a: (math.log(a) - m1) ** 2 * w(a), lo, hi, f"sigma2({alpha})", z * span**2) / z
    return shift + math.log(z), m1, max(m2, 0.0)


def _atomic_moments(law, alpha):
    a, _, p = law.atoms()
    keep = p > 0
    la = np.log(a[keep])
    w = np.log(p[keep]) + alpha * la
    lam = float(logsumexp(w))
    q = np.exp(w - lam)
    mu = float(np.sum(q * la))
    s2 = float(np.sum(q * (la - mu) ** 2))
    return lam, mu, s2


def _log_power_const(b, alpha):
    b = abs(b)
    if b > 0:
        return alpha * math.log(b)
    if alpha > 0:
        return -math.inf
    return 0.0 if alpha == 0 else math.inf


def _log_lambda_B(law, alpha):
    p = law.params
    fam = law.family
    if fam == "lognormal_A_const_B" or fam == "two_point_A_const_B":
        return _log_power_const(p["b"], alpha)
    if fam == "lognormal_A_lognormal_B":
        return alpha * p["mean_log_b"] + 0.5 * alpha * alpha * p["var_log_b"]
    if fam == "bounded_density_A_bounded_B":
        lo, hi = p["b_lo"], p["b_hi"]
        if hi == lo:
            return _log_power_const(lo, alpha)
        if lo <= 0 <= hi and alpha <= -1:
            return math.inf
        if alpha == -1:
            val = math.log(abs(hi)) - math.log(abs(lo))
            val = abs(val)
        else:
            def F(x):
                return math.copysign(abs(x) ** (alpha + 1), x) / (alpha + 1)

            val = abs(F(hi) - F(lo))
        return math.log(val / (hi - lo)) if val > 0 else -math.inf
    _, b, prob = law.atoms()
    keep = prob > 0
    terms = [math.log(q) + _log_power_const(x, alpha) for x, q in zip(b[keep], prob[keep])]
    return float(logsumexp(terms))


def log_moments(law, alpha):
    """Return ``(Lambda, mu, sigma2)`` at ``alpha``."""
    alpha = float(alpha)
    fam = law.family
    if fam in ("lognormal_A_const_B", "lognormal_A_lognormal_B"):
        m, s2 = law.params["mean_log_a"], law.params["var_log_a"]
        return alpha * m + 0.5 * alpha * alpha * s2, m + alpha * s2, s2
    if law.is_atomic:
        return _atomic_moments(law, alpha)
    return _density_moments(law, alpha)


def Lambda(law, alpha):
    return log_moments(law, alpha)[0]


def mu(law, alpha):
    return log_moments(law, alpha)[1]


def cgf_profile(law, alpha):
    """Evaluate ``lambda, Lambda, lambda_B, Lambda_B, mu, sigma2`` at ``alpha``."""
    alpha = float(alpha)
    if alpha == 0.0:
        lam_, mu_, s2 = log_moments(law, 0.0)
        lam_ = 0.0
    else:
        lam_, mu_, s2 = log_moments(law, alpha)
    lb = _log_lambda_B(law, alpha)
    in_domain = math.isfinite(lam_) and math.isfinite(mu_)
    with np.errstate(over="ignore"):
        lam_exp = float(np.exp(lam_))
        lb_exp = float(np.exp(lb))
    return CgfProfile(alpha, lam_exp, lam_, lb_exp, lb, mu_, s2, in_domain)


def numeric_derivatives(fn, alpha, h=None):
    """First and second derivatives by central differences with one Richardson step."""
    if h is None:
        h = max(1e-3, 1e-3 * abs(alpha))

    def d1(step):
        return (fn(alpha + step) - fn(alpha - step)) / (2 * step)

    def d2(step):
        return (fn(alpha + step) - 2 * fn(alpha) + fn(alpha - step)) / step**2

    return (4 * d1(h / 2) - d1(h)) / 3, (4 * d2(h / 2) - d2(h)) / 3


# -- domain and slopes -------------------------------------------------------


def slope_interval(law):
    """Closure of the range of ``mu``: the essential range of ``log A``."""
    fam = law.family
    if fam in ("lognormal_A_const_B", "lognormal_A_lognormal_B"):
        return -math.inf, math.inf
    if fam == "bounded_density_A_bounded_B":
        return math.log(law.params["a_lo"]), math.log(law.params["a_hi"])
    a, _, p = law.atoms()
    la = np.log(a[p > 0])
    return float(la.min()), float(la.max())


def _finite_at(law, alpha):
    try:
        lam_, mu_, _ = log_moments(law, alpha)
    except (NumericEvaluationError, OverflowError, ZeroDivisionError):
        return False
    return math.isfinite(lam_) and math.isfinite(mu_)


@functools.lru_cache(maxsize=64)
def probe_domain(law, limit=PROBE_LIMIT):
    """Interval ``[lo, hi]`` of alpha reached by doubling from +-1 while evaluation succeeds."""
    ends = []
    for sign in (-1.0, 1.0):
        last = 0.0
        step = 1.0
        while step <= limit and _finite_at(law, sign * step):
            last = sign * step
            step *= 2.0
        ends.append(last)
    return ends[0], ends[1]


def _polish(fn, dfn, x, tol):
    for _ in range(4):
        fx = fn(x)
        if abs(fx) <= tol:
            break
        d = dfn(x)
        if not d:
            break
        nx = x - fx / d
        if abs(fn(nx)) >= abs(fx):
            break
        x = nx
    return x


def solve_xi(law):
    """Positive root of ``Lambda``; bracketing plus Newton polish."""
    _, hi_dom = probe_domain(law)
    mu0 = mu(law, 0.0)
    if not mu0 < 0:
        raise NoRootError(f"E[log A] = {mu0:.6g} is not negative; Lambda has no positive root", (0.0, hi_dom))
    hi = 1.0
    while Lambda(law, hi) <= 0:
        hi *= 2.0
        if hi > hi_dom or hi > PROBE_LIMIT:
            raise NoRootError(f"Lambda has no sign change on (0, {hi / 2:g}]", (0.0, hi / 2))
    # the minimiser of Lambda gives a point with Lambda < 0
    amin = optimize.brentq(lambda a: mu(law, a), 0.0, hi, xtol=1e-14)
    xi = optimize.brentq(lambda a: Lambda(law, a), amin, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    xi = _polish(lambda a: Lambda(law, a), lambda a: mu(law, a), xi, 0.0)
    return float(xi)


def solve_slope(law, target):
    """Solve ``mu(alpha) = target`` for ``target`` strictly inside the slope interval."""
    s_lo, s_hi = slope_interval(law)
    if not (s_lo < target < s_hi):
        raise NoSolutionError(
            f"slope {target:.6g} outside attainable slopes ({s_lo:.6g}, {s_hi:.6g})", (s_lo, s_hi)
        )
    lo, hi = -1.0, 1.0
    while mu(law, hi) <= target:
        hi *= 2.0
        if hi > PROBE_LIMIT:
            raise NoSolutionError(f"slope {target:.6g} not reached for alpha <= {PROBE_LIMIT:g}", (s_lo, s_hi))
    while mu(law, lo) >= target:
        lo *= 2.0
        if lo < -PROBE_LIMIT:
            raise NoSolutionError(f"slope {target:.6g} not reached for alpha >= {-PROBE_LIMIT:g}", (s_lo, s_hi))
    a = optimize.brentq(lambda x: mu(law, x) - target, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    a = _polish(lambda x: mu(law, x) - target, lambda x: log_moments(law, x)[2], a, 0.0)
    return float(a)


def solve_alpha(law, tau):
    """Solve ``mu(alpha) = 1 / tau`` (unique by convexity)."""
    tau = float(tau)
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau}")
    return solve_slope(law, 1.0 / tau)


def rate_function(law, tau):
    """``I(tau) = alpha(tau) - tau * Lambda(alpha(tau))``."""
    a = solve_alpha(law, tau)
    return float(a - tau * Lambda(law, a))


def legendre(law, x):
    """Convex conjugate ``sup_alpha (alpha x - Lambda(alpha))``; ``inf`` if it diverges."""
    x = float(x)
    s_lo, s_hi = slope_interval(law)
    if x < s_lo or x > s_hi:
        return math.inf
    if x in (s_lo, s_hi):
        if law.is_atomic:
            a, _, p = law.atoms()
            la = np.log(a)
            return float(-math.log(p[(la == x) & (p > 0)].sum()))
        return math.inf
    try:
        a = solve_slope(law, x)
        return max(0.0, a * x - Lambda(law, a))
    except (NoSolutionError, NumericEvaluationError):
        pass
    lo, hi = probe_domain(law)
    res = optimize.minimize_scalar(lambda a: Lambda(law, a) - a * x, bounds=(lo, hi), method="bounded")
    if min(abs(res.x - lo), abs(res.x - hi)) < 1e-6 * max(1.0, abs(res.x)):
        return math.inf
    return max(0.0, -float(res.fun))


def classify(tau, rho):
    if abs(tau - rho) <= CRITICAL_RTOL * rho:
        return CRITICAL
    return SMALL_TIME if tau < rho else LARGE_TIME


def summarize(law, tau):
    xi = solve_xi(law)
    rho = 1.0 / mu(law, xi)
    tau = float(tau)
    regime = classify(tau, rho)
    if regime == CRITICAL:
        a = xi
    else:
        a = solve_alpha(law, tau)
    return AsymptoticSummary(xi, rho, tau, a, float(a - tau * Lambda(law, a)), regime)


def _golden_min(fn, lo, hi, tol=1e-12):
    res = optimize.minimize_scalar(fn, bounds=(lo, hi), method="bounded", options={"xatol": tol})
    return float(res.x)


def regime_report(law, tau=None, *, alpha=None, grid_step=1e-3):
    """Large-time regime diagnostics at ``tau`` (or directly at ``alpha``).

    ``count1``: ``E[log A] > Lambda(alpha)``.  ``count2``: some
    ``beta < min(1, alpha)`` with ``Lambda(beta) < Lambda(alpha)``.  The exponent
    gap is ``mu(alpha)(alpha - beta) + mu(0) - Lambda(alpha)`` at the grid point
    ``beta in (alpha, xi)`` maximising ``(1 - mu(alpha)/mu(beta))`` times it.
    """
    if (tau is None) == (alpha is None):
        raise ValueError("pass exactly one of tau or alpha")
    if alpha is None:
        tau = float(tau)
        a = solve_alpha(law, tau)
    else:
        a = float(alpha)
        m_a = mu(law, a)
        tau = 1.0 / m_a if m_a > 0 else math.nan
    lam_a, mu_a, _ = log_moments(law, a)
    mu0 = mu(law, 0.0)
    gap1 = mu0 - lam_a

    witness = None
    upper = min(1.0, a)
    if upper > 0:
        grid = np.arange(grid_step, upper, grid_step)
        if grid.size:
            vals = np.array([Lambda(law, g) for g in grid])
            k = int(np.argmin(vals))
            lo = grid[max(k - 1, 0)] if k > 0 else grid_step / 2
            hi = grid[min(k + 1, grid.size - 1)] if k < grid.size - 1 else upper
            beta = _golden_min(lambda b: Lambda(law, b), min(lo, grid[k]), max(hi, grid[k]))
            if Lambda(law, beta) > vals[k]:
                beta = float(grid[k])
            if Lambda(law, beta) < lam_a and beta < upper:
                witness = beta
    count2 = witness is not None

    try:
        xi = solve_xi(law)
    except NoRootError:
        xi = math.nan
    exp_gap, exp_beta = math.nan, None
    if math.isfinite(xi) and a < xi and mu_a > 0:
        betas = np.arange(a + grid_step, xi, grid_step)
        best = -math.inf
        for b in betas:
            mu_b = mu(law, b)
            inner = mu_a * (a - b) + mu0 - lam_a
            bound = (1.0 - mu_a / mu_b) * inner
            if bound > best:
                best, exp_gap, exp_beta = bound, inner, float(b)

    applicable = math.isfinite(xi) and math.isfinite(tau) and tau > 1.0 / mu(law, xi) * (1 + CRITICAL_RTOL)
    return RegimeReport(
        tau=tau,
        alpha=a,
        count1_gap=float(gap1),
        count1_holds=bool(gap1 > 0),
        count2_witness=witness,
        count2_holds=count2,
        exponent_gap=float(exp_gap),
        exponent_beta=exp_beta,
        varrho=float(math.exp(lam_a)),
        applicable=bool(applicable),
    )


def count1_scale_threshold(law, alpha):
    """Smallest scale ``t`` with ``E[log(A/t)] > Lambda_t(alpha)`` (needs ``alpha > 1``).

    Dividing A by ``t`` lowers ``mu(0)`` by ``log t`` and ``Lambda(alpha)`` by
    ``alpha log t``, so the gap grows like ``(alpha - 1) log t``.
    """
    alpha = float(alpha)
    if not alpha > 1:
        raise PreconditionError("scaling only opens the count1 gap for alpha > 1")
    log_t = (Lambda(law, alpha) - mu(law, 0.0)) / (alpha - 1.0)
    return math.exp(log_t)
