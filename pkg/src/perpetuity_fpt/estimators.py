"""Monte Carlo estimators, explicit bounds and asymptotic predictions.

All Monte Carlo estimators split ``n_samples`` into chunks of ``chunk_size``
paths.  Chunk ``k`` draws from the stream ``(seed, stream_id, k)`` and the
per-chunk sums are reduced in chunk order, so a result is bit-identical for
a fixed ``(seed, chunk_size)`` regardless of ``threads``.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from . import cgf
from .errors import (
    CapabilityError,
    DegenerateFitError,
    DomainError,
    NoRootError,
    NoSolutionError,
    PreconditionError,
)
from .process import backward_max_batch, forward_batch, n_steps_for, passage_batch, default_horizon
from .rng import chunk_sizes, stream
from .tilt import LOG_CLAMP, tilt

CRUDE = "crude"
IMPORTANCE = "importance"
ENUMERATION = "enumeration"

DEFAULT_CHUNK = 100_000
ENUMERATION_MAX_LEAVES = 2**24
ESS_WARN = 100.0
MIN_EXCEEDANCES = 30
DEFAULT_BURN_IN = 1000

# default stream ids keep the estimators on independent random streams
STREAM_PASSAGE = 1
STREAM_FORWARD = 2
STREAM_C_TAU = 3
STREAM_GOLDIE = 4
STREAM_CESARO = 5
STREAM_TAIL = 6
STREAM_YBAR = 7


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    n_samples: int
    method: str
    ci95: tuple
    effective_sample_size: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_moments(cls, s1, s2, n, method, ess=None, scale=1.0, diagnostics=None):
        mean = s1 / n
        var = max(s2 / n - mean * mean, 0.0) * n / (n - 1) if n > 1 else 0.0
        se = math.sqrt(var / n) if n > 0 else math.inf
        value = scale * mean
        stderr = abs(scale) * se
        return cls(
            value,
            stderr,
            int(n),
            method,
            (value - 1.96 * stderr, value + 1.96 * stderr),
            float(n if ess is None else ess),
            diagnostics or {},
        )


def _map_chunks(fn, n_samples, seed, stream_id, chunk_size, threads):
    sizes = chunk_sizes(n_samples, chunk_size)
    jobs = [(stream(seed, stream_id, k), size) for k, size in enumerate(sizes)]
    if threads is None or threads <= 1 or len(jobs) <= 1:
        return [fn(rng, size) for rng, size in jobs]
    with ThreadPoolExecutor(max_workers=int(threads)) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def _fsum(parts, key):
    return math.fsum(p[key] for p in parts)


def _check_u_tau(u, tau):
    if not u > 1:
        raise DomainError(f"u must exceed 1, got {u}")
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau}")


# -- first passage -------------------------------------------------------------


def tilt_parameter(law, tau):
    """``alpha(tau)`` for ``tau < rho``, otherwise ``xi``."""
    s = cgf.summarize(law, tau)
    return s.alpha_tau if s.regime == cgf.SMALL_TIME else s.xi


def enumerate_passage(law, u, n_steps, strict=True):
    """Exact ``P{Y_k > u for some k <= n_steps}`` for an atomic law.

    Prefixes that have already crossed are retired with their probability, so
    at most ``atoms ** n_steps`` leaves are ever held.
    """
    a, b, p = law.atoms()
    keep = p > 0
    a, b, p = a[keep], b[keep], p[keep]
    if len(p) ** n_steps > ENUMERATION_MAX_LEAVES:
        raise CapabilityError(f"{len(p)}**{n_steps} paths exceed the enumeration cap of 2**24")
    y = np.zeros(1)
    pi = np.ones(1)
    prob = np.ones(1)
    total = []
    for _ in range(n_steps):
        y = (y[:, None] + pi[:, None] * b[None, :]).ravel()
        pi = (pi[:, None] * a[None, :]).ravel()
        prob = (prob[:, None] * p[None, :]).ravel()
        h = y > u if strict else y >= u
        total.append(math.fsum(prob[h]))
        y, pi, prob = y[~h], pi[~h], prob[~h]
        if prob.size == 0:
            break
    return math.fsum(total)


def prob_passage(
    law,
    u,
    tau,
    n_samples=100_000,
    method=CRUDE,
    seed=0,
    stream_id=STREAM_PASSAGE,
    chunk_size=DEFAULT_CHUNK,
    threads=1,
    alpha=None,
):
    """Estimate ``P{T_u <= tau} = P{Y_n > u for some n <= floor(tau log u)}``.

    ``method="importance"`` simulates under the tilt at ``alpha`` (default
    ``alpha(tau)`` for ``tau < rho`` and ``xi`` otherwise) and averages the
    likelihood ratio stopped at the passage index.
    """
    _check_u_tau(u, tau)
    n_u = n_steps_for(u, tau)
    if method == ENUMERATION:
        if not law.is_atomic:
            raise CapabilityError("enumeration needs an atomic law")
        value = enumerate_passage(law, u, n_u) if n_u > 0 else 0.0
        return Estimate(value, 0.0, 0, ENUMERATION, (value, value), math.inf, {"n_u": n_u})
    if method not in (CRUDE, IMPORTANCE):
        raise ValueError(f"unknown method {method!r}")
    if n_u <= 0:
        return Estimate(0.0, 0.0, int(n_samples), method, (0.0, 0.0), float(n_samples), {"n_u": n_u})

    if method == CRUDE:
        def run(rng, size):
            batch = passage_batch(law, u, n_u, size, rng)
            h = float(np.count_nonzero(batch.hit_index))
            return {"s1": h, "s2": h}

        parts = _map_chunks(run, n_samples, seed, stream_id, chunk_size, threads)
        return Estimate.from_moments(_fsum(parts, "s1"), _fsum(parts, "s2"), n_samples, CRUDE, diagnostics={"n_u": n_u})

    if alpha is None:
        alpha = tilt_parameter(law, tau)
    tl = tilt(law, alpha)

    def run(rng, size):
        batch = passage_batch(tl, u, n_u, size, rng)
        h = batch.hit_index > 0
        lw = batch.log_weight[h]
        clamped = int(np.count_nonzero(np.abs(lw) > LOG_CLAMP))
        w = np.exp(np.clip(lw, -LOG_CLAMP, LOG_CLAMP))
        return {"s1": math.fsum(w), "s2": math.fsum(w * w), "hits": int(h.sum()), "clamped": clamped}

    parts = _map_chunks(run, n_samples, seed, stream_id, chunk_size, threads)
    s1, s2 = _fsum(parts, "s1"), _fsum(parts, "s2")
    ess = s1 * s1 / s2 if s2 > 0 else 0.0
    diag = {
        "n_u": n_u,
        "alpha": alpha,
        "hits": sum(p["hits"] for p in parts),
        "clamped": sum(p["clamped"] for p in parts),
    }
    if ess < ESS_WARN:
        warnings.warn(f"importance sampling effective sample size {ess:.1f} < {ESS_WARN:g}", RuntimeWarning)
        diag["warning"] = "low effective sample size"
    return Estimate.from_moments(s1, s2, n_samples, IMPORTANCE, ess=ess, diagnostics=diag)


def passage_times(law, u, n_samples, alpha=None, horizon=None, seed=0, stream_id=STREAM_PASSAGE,
                  chunk_size=DEFAULT_CHUNK, threads=1):
    """Scaled passage times ``T_u`` of the hitting paths and their likelihood weights.

    Paths are simulated under the tilt at ``alpha`` (default ``xi``) up to
    ``horizon`` steps (default ``ceil(3 rho log u)``).
    """
    if alpha is None:
        alpha = cgf.solve_xi(law)
    if horizon is None:
        horizon = default_horizon(law, u)
    tl = tilt(law, alpha)

    def run(rng, size):
        batch = passage_batch(tl, u, horizon, size, rng)
        h = batch.hit_index > 0
        return batch.hit_index[h], batch.log_weight[h]

    parts = _map_chunks(run, n_samples, seed, stream_id, chunk_size, threads)
    idx = np.concatenate([p[0] for p in parts]) if parts else np.zeros(0, dtype=np.int64)
    lw = np.concatenate([p[1] for p in parts]) if parts else np.zeros(0)
    w = np.exp(np.clip(lw - (lw.max() if lw.size else 0.0), -LOG_CLAMP, 0.0))
    return idx / math.log(u), w


def weighted_quantile(values, weights, q):
    order = np.argsort(values, kind="stable")
    v = np.asarray(values)[order]
    cw = np.cumsum(np.asarray(weights)[order])
    return float(v[np.searchsorted(cw, q * cw[-1])])


def conditional_concentration(law, u, n_samples, window=0.5, **kwargs):
    """Weighted median of ``T_u`` given passage, and the mass outside ``rho +- window``."""
    xi = cgf.solve_xi(law)
    rho = 1.0 / cgf.mu(law, xi)
    T, w = passage_times(law, u, n_samples, alpha=xi, **kwargs)
    if T.size == 0:
        raise PreconditionError("no passages observed")
    return {
        "u": u,
        "rho": rho,
        "median": weighted_quantile(T, w, 0.5),
        "out_of_window_mass": float(w[np.abs(T - rho) > window].sum() / w.sum()),
        "hits": int(T.size),
    }


def prob_exceedance_forward(law, u, tau, n_samples=100_000, seed=0, stream_id=STREAM_FORWARD,
                            chunk_size=DEFAULT_CHUNK, threads=1):
    """Crude estimate of ``P{Mstar_{n_u} > u}``."""
    _check_u_tau(u, tau)
    n_u = n_steps_for(u, tau)
    if n_u <= 0:
        return Estimate(0.0, 0.0, int(n_samples), CRUDE, (0.0, 0.0), float(n_samples), {"n_u": n_u})

    def run(rng, size):
        m = forward_batch(law, n_u, size, rng)
        h = float(np.count_nonzero(m > u))
        return {"s1": h, "s2": h}

    parts = _map_chunks(run, n_samples, seed, stream_id, chunk_size, threads)
    return Estimate.from_moments(_fsum(parts, "s1"), _fsum(parts, "s2"), n_samples, CRUDE, diagnostics={"n_u": n_u})


def prob_ybar_exceeds(law, n, u, n_samples=100_000, seed=0, stream_id=STREAM_YBAR, chunk_size=DEFAULT_CHUNK,
                      threads=1):
    """Crude estimate of ``P{Ybar_n > u}`` with ``Ybar_n = sum Pi_{i-1} |B_i|``."""

    def run(rng, size):
        ybar = np.zeros(size)
        pi = np.ones(size)
        for _ in range(n):
            a, b = law.sample(rng, size)
            ybar += pi * np.abs(b)
            pi *= a
        h = float(np.count_nonzero(ybar > u))
        return {"s1": h, "s2": h}

    parts = _map_chunks(run, n_samples, seed, stream_id, chunk_size, threads)
    return Estimate.from_moments(_fsum(parts, "s1"), _fsum(parts, "s2"), n_samples, CRUDE)


# -- prefactor constants -------------------------------------------------------


def dual_max_sequence(a_tilde, b_tilde):
    """``X_n = max_k sum_{j=k}^n (At_1 ... At_{j-1}) Bt_j  v 0`` for ``n = 1..len``.

    With ``Yt_n`` the partial sums, ``X_n = max(0, Yt_n - min(Yt_0..Yt_{n-1}))``.
    """
    at = np.asarray(a_tilde, dtype=float)
    bt = np.asarray(b_tilde, dtype=float)
    out = np.empty(at.shape[0])
    y, p, lo = 0.0, 1.0, 0.0
    for n in range(at.shape[0]):
        lo = min(lo, y)
        y = y + p * bt[n]
        p = p * at[n]
        out[n] = max(0.0, y - lo)
    return out


def estimate_C_tau(law, tau, n_terms=256, n_samples=100_000, seed=0, stream_id=STREAM_C_TAU,
                   chunk_size=DEFAULT_CHUNK, threads=1):
    """Prefactor ``C(tau)`` of the small-time passage asymptotics.

    ``C(tau) = E_alpha[X^alpha] / (alpha sigma(alpha) sqrt(2 pi tau))`` where
    ``X`` is the running maximum of the dual perpetuity in ``(1/A, B/A)``
    under the tilt at ``alpha = alpha(tau)``.  ``E_alpha[X_n^alpha]`` is also
    reported at every power of two up to ``n_terms``.

    An atomic law with no atom having ``A > 1`` and ``B > 0`` never crosses
    large levels; the estimate is then exactly zero.
    """
    if law.is_atomic:
        a, b, p = law.atoms()
        if not np.any((a > 1) & (b > 0) & (p > 0)):
            return Estimate(0.0, 0.0, int(n_samples), IMPORTANCE, (0.0, 0.0), float(n_samples),
                            {"degenerate": "P{A > 1, B > 0} = 0"})
    s = cgf.summarize(law, tau)
    if s.regime != cgf.SMALL_TIME:
        raise PreconditionError(f"C(tau) needs tau < rho = {s.rho:.6g}; got tau = {tau}")
    alpha = s.alpha_tau
    prof = cgf.cgf_profile(law, alpha)
    if not (math.isfinite(prof.Lambda) and math.isfinite(prof.Lambda_B)):
        raise PreconditionError("Lambda and Lambda_B must be finite at alpha(tau)")
    prefactor = 1.0 / (alpha * math.sqrt(prof.sigma2) * math.sqrt(2 * math.pi * tau))
    checkpoints = sorted({2**k for k in range(int(math.log2(n_terms)) + 1)} | {n_terms, max(n_terms // 2, 1)})
    tl = tilt(law, alpha)

    def run(rng, size):
        y = np.zeros(size)
        logp = np.zeros(size)
        lo = np.zeros(size)
        sums = {}
        for n in range(1, n_terms + 1):
            la, b = tl.sample_log(rng, size)
            np.minimum(lo, y, out=lo)
            # At = 1/A, Bt = B/A
            y += np.exp(logp - la) * b
            logp -= la
            if n in checkpoints:
                xa = np.maximum(y - lo, 0.0) ** alpha
                sums[n] = (math.fsum(xa), math.fsum(xa * xa))
        return sums

    parts = _map_chunks(run, n_samples, seed, stream_id, chunk_size, threads)
    by_n = {}
    for n in checkpoints:
        s1 = math.fsum(p[n][0] for p in parts)
        s2 = math.fsum(p[n][1] for p in parts)
        by_n[n] = Estimate.from_moments(s1, s2, n_samples, IMPORTANCE)
    final = by_n[n_terms]
    half = by_n[max(n_terms // 2, 1)]
    diff = abs(final.value - half.value)
    diag = {
        "alpha": alpha,
        "prefactor": prefactor,
        "expectation_by_n": {n: e.value for n, e in by_n.items()},
        "halving_diff_over_stderr": diff / final.stderr if final.stderr > 0 else 0.0,
    }
    return Estimate(
        prefactor * final.value,
        prefactor * final.stderr,
        int(n_samples),
        IMPORTANCE,
        (prefactor * final.ci95[0], prefactor * final.ci95[1]),
        float(n_samples),
        diag,
    )


def _xi_rate(law):
    try:
        xi = cgf.solve_xi(law)
    except NoRootError as exc:
        raise PreconditionError(f"no tail exponent xi: {exc}") from exc
    return xi, cgf.mu(law, xi)


def estimate_CM_goldie(law, burn_in=DEFAULT_BURN_IN, n_samples=100_000, seed=0, stream_id=STREAM_GOLDIE,
                       chunk_size=DEFAULT_CHUNK, threads=1):
    """``C_M = E[((A M + B)^+)^xi - (A M)^xi] / (xi mu(xi))`` with M approximately stationary.

    Each chain runs ``burn_in`` steps from zero, then ``burn_in`` more; the
    relative change of the 0.99 quantile between the two snapshots is
    reported as a burn-in diagnostic.
    """
    xi, mu_xi = _xi_rate(law)
    if not law.nonarithmetic_logA:
        warnings.warn("law of log A is arithmetic; the Goldie constant describes a lattice-averaged tail",
                      RuntimeWarning)

    def run(rng, size):
        m1 = forward_batch(law, burn_in, size, rng)
        m2 = forward_batch(law, burn_in, size, rng, m0=m1)
        a, b = law.sample(rng, size)
        am = a * m2
        g = np.maximum(am + b, 0.0) ** xi - am**xi
        return {
            "s1": math.fsum(g),
            "s2": math.fsum(g * g),
            "q1": float(np.quantile(m1, 0.99)),
            "q2": float(np.quantile(m2, 0.99)),
        }

    parts = _map_chunks(run, n_samples, seed, stream_id, chunk_size, threads)
    q1 = float(np.mean([p["q1"] for p in parts]))
    q2 = float(np.mean([p["q2"] for p in parts]))
    diag = {"xi": xi, "mu_xi": mu_xi, "prefactor": 1 / (xi * mu_xi), "burn_in_q99_rel_change": abs(q2 - q1) / q2 if q2 > 0 else 0.0}
    return Estimate.from_moments(
        _fsum(parts, "s1"), _fsum(parts, "s2"), n_samples, CRUDE, scale=1 / (xi * mu_xi), diagnostics=diag
    )


def estimate_CM_cesaro(law, n_terms=512, n_samples=100_000, seed=0, stream_id=STREAM_CESARO,
                       chunk_size=DEFAULT_CHUNK, threads=1, control_variate=True):
    """``C_M = lim E[M_n^xi] / (n xi mu(xi))``.

    With ``control_variate=True`` the forward chain (same law of ``M_n``) is
    used and the mean-zero sum ``sum_k Mstar_k^xi (A_{k+1}^xi - 1)`` is
    subtracted from ``Mstar_n^xi``; ``E[A^xi] = 1`` makes it unbiased and keeps
    the variance bounded.  Without it, ``M_n`` comes from the backward
    recursion directly; ``M_n^xi`` then has a ``1/x`` tail up to
    ``exp(xi mu(xi) n)`` and the sample mean is badly biased low for
    realistic sample sizes.
    """
    xi, mu_xi = _xi_rate(law)
    half = max(n_terms // 2, 1)

    def run(rng, size):
        if control_variate:
            m = np.zeros(size)
            est = np.zeros(size)
            snap = None
            for k in range(n_terms):
                a, b = law.sample(rng, size)
                mx = m**xi
                est -= mx * (a**xi - 1.0)
                m = np.maximum(a * m + b, 0.0)
                if k + 1 == half:
                    snap = est + m**xi
            est += m**xi
        else:
            m, snaps = backward_max_batch(law, n_terms, size, rng, record=(half,))
            est = m**xi
            snap = snaps[half] ** xi
        return {"s1": math.fsum(est), "s2": math.fsum(est * est), "h1": math.fsum(snap)}

    parts = _map_chunks(run, n_samples, seed, stream_id, chunk_size, threads)
    scale = 1.0 / (xi * mu_xi * n_terms)
    half_value = _fsum(parts, "h1") / n_samples / (xi * mu_xi * half)
    diag = {"xi": xi, "mu_xi": mu_xi, "prefactor": 1 / (xi * mu_xi), "half_n_value": half_value,
            "control_variate": control_variate}
    return Estimate.from_moments(_fsum(parts, "s1"), _fsum(parts, "s2"), n_samples, CRUDE, scale=scale,
                                 diagnostics=diag)


# -- tail fit ------------------------------------------------------------------


@dataclass(frozen=True)
class TailFit:
    xi_hat: float
    C_hat: float
    table: list
    n_samples: int
    warnings: tuple = ()


def stationary_sample(law, n_run, seed=0, stream_id=STREAM_TAIL, burn_in=DEFAULT_BURN_IN, n_chains=10_000):
    """``n_run`` post-burn-in values of ``Mstar`` pooled over ``n_chains`` parallel chains."""
    n_chains = int(min(n_chains, n_run))
    steps = int(math.ceil(n_run / n_chains))
    rng = stream(seed, stream_id)
    m = forward_batch(law, burn_in, n_chains, rng)
    out = np.empty(steps * n_chains)
    for k in range(steps):
        a, b = law.sample(rng, n_chains)
        m = np.maximum(a * m + b, 0.0)
        out[k * n_chains:(k + 1) * n_chains] = m
    return out[:n_run]


def auto_u_grid(sample, p_hi=1e-2, p_lo=1e-4, points=7):
    """Grid of empirical quantiles with survival probabilities log-spaced in ``[p_lo, p_hi]``."""
    probs = np.logspace(math.log10(p_hi), math.log10(p_lo), points)
    return np.quantile(sample, 1.0 - probs)


def tail_fit(law, n_run, u_grid="auto", seed=0, stream_id=STREAM_TAIL, burn_in=DEFAULT_BURN_IN,
             n_chains=10_000, min_exceedances=MIN_EXCEEDANCES):
    """Fit ``P{M > u} ~ C u^-xi`` to a long forward simulation.

    ``xi_hat`` is minus the least-squares slope of ``log P_hat`` on ``log u``
    and ``C_hat`` the geometric mean of ``u^xi_hat P_hat``.  Grid points with
    fewer than ``min_exceedances`` exceedances are dropped from the fit.
    """
    sample = stationary_sample(law, n_run, seed, stream_id, burn_in, n_chains)
    if isinstance(u_grid, str):
        if u_grid != "auto":
            raise ValueError("u_grid must be a sequence or 'auto'")
        u_grid = auto_u_grid(sample)
    u_grid = np.asarray(u_grid, dtype=float)
    if u_grid.size < 3 or np.any(np.diff(u_grid) <= 0):
        raise ValueError("u_grid must be increasing with at least 3 points")
    n = sample.size
    srt = np.sort(sample)
    counts = n - np.searchsorted(srt, u_grid, side="right")
    table = []
    notes = []
    for u, c in zip(u_grid, counts):
        p = c / n
        lo = stats.chi2.ppf(0.025, 2 * c) / 2 / n if c > 0 else 0.0
        hi = stats.chi2.ppf(0.975, 2 * (c + 1)) / 2 / n
        row = {"u": float(u), "p_hat": float(p), "exceedances": int(c), "ci_low": float(lo), "ci_high": float(hi),
               "dropped": bool(c < min_exceedances), "warning": ""}
        if c < min_exceedances:
            row["warning"] = f"only {c} exceedances; widened Poisson interval, point dropped"
        table.append(row)
    if table[-1]["dropped"]:
        notes.append("fewer than %d exceedances at the largest u" % min_exceedances)
    used = [r for r in table if not r["dropped"]]
    if len(used) < 2:
        raise DegenerateFitError(f"only {len(used)} grid points with >= {min_exceedances} exceedances")
    lu = np.log([r["u"] for r in used])
    lp = np.log([r["p_hat"] for r in used])
    slope, _ = np.polyfit(lu, lp, 1)
    xi_hat = -float(slope)
    c_hat = float(np.exp(np.mean(lp + xi_hat * lu)))
    if not law.nonarithmetic_logA:
        notes.append("log A is arithmetic: P{M > u} u^xi oscillates and has no limit")
    for r in table:
        r["scaled"] = r["p_hat"] * r["u"] ** xi_hat
    return TailFit(xi_hat, c_hat, table, n, tuple(notes))


# -- analytic approximations and bounds ----------------------------------------


def petrov_tail(law, n, c, gamma=0.0):
    """Leading term of the sharp large-deviation approximation of ``P{S_n > n(c + gamma)}``."""
    alpha = cgf.solve_slope(law, float(c))
    if not alpha > 1e-12:
        raise NoSolutionError(f"slope c = {c} gives alpha = {alpha:.3g}; the approximation needs alpha > 0")
    lam, _, s2 = cgf.log_moments(law, alpha)
    expo = -n * (alpha * (c + gamma) - lam + gamma * gamma / (2 * s2))
    return math.exp(expo - math.log(alpha * math.sqrt(s2) * math.sqrt(2 * math.pi * n)))


def gaussian_walk_tail(law, n, c, gamma=0.0):
    """Exact ``P{S_n > n(c + gamma)}`` when log A is Gaussian."""
    if law.family not in ("lognormal_A_const_B", "lognormal_A_lognormal_B"):
        raise PreconditionError("exact walk tail needs Gaussian log A")
    m, s2 = law.params["mean_log_a"], law.params["var_log_a"]
    z = (n * (c + gamma) - n * m) / math.sqrt(n * s2)
    return float(stats.norm.sf(z))


def bound_constant(law, alpha, epsilon, n):
    """``b n (n-1)^{2(alpha+eps)} exp((n-1)(eps mu + eps^2 sigma2))``; zero at ``n = 1``."""
    ae = alpha + epsilon
    lam_a, mu_a, s2_a = cgf.log_moments(law, alpha)
    log_lb = cgf.cgf_profile(law, ae).Lambda_B
    log_b = ae * math.log(math.pi**2 / 6) + log_lb - lam_a
    if n == 1:
        return 0.0
    return math.exp(log_b + math.log(n) + 2 * ae * math.log(n - 1) + (n - 1) * (epsilon * mu_a + epsilon**2 * s2_a))


def chebyshev_bound(law, alpha, epsilon, n, u):
    """Upper bound ``C_n lambda(alpha)^n u^{-(alpha+eps)}`` on ``P{Ybar_n > u}``.

    Applied for ``n >= 2`` only: the constant vanishes at ``n = 1``.
    """
    if n < 2:
        raise PreconditionError("the bound is applied for n >= 2 (its constant is zero at n = 1)")
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    xi = cgf.solve_xi(law)
    if alpha < xi * (1 - 1e-12):
        raise PreconditionError(f"alpha = {alpha} must be at least xi = {xi:.6g}")
    prof = cgf.cgf_profile(law, alpha + epsilon)
    if not (prof.in_domain and math.isfinite(prof.Lambda_B)):
        raise DomainError(f"Lambda or Lambda_B infinite at alpha + epsilon = {alpha + epsilon}")
    lam_a = cgf.Lambda(law, alpha)
    ae = alpha + epsilon
    log_b = ae * math.log(math.pi**2 / 6) + prof.Lambda_B - lam_a
    mu_a, s2_a = cgf.log_moments(law, alpha)[1:]
    log_c = log_b + math.log(n) + 2 * ae * math.log(n - 1) + (n - 1) * (epsilon * mu_a + epsilon**2 * s2_a)
    return math.exp(log_c + n * lam_a - ae * math.log(u))


@dataclass(frozen=True)
class Prediction:
    u: float
    tau: float
    regime: str
    value: float
    formula: str
    bound_curve: Optional[list] = None
    warnings: tuple = ()


def predict(law, u, tau, C_tau=None, C_M=None, k_max=10):
    """Regime-appropriate asymptotic value of ``P{T_u <= tau}``.

    small time: ``C(tau) u^{-I(tau)} / sqrt(log u)``; critical:
    ``C_M u^{-xi} / 2``; large time: ``C_M u^{-xi}``, plus the shape
    ``varrho^k u^{-I(tau)} / sqrt(log u)`` (unit constant) of the interval
    bound when count2 holds.
    """
    _check_u_tau(u, tau)
    s = cgf.summarize(law, tau)
    log_u = math.log(u)
    notes = []
    if s.regime == cgf.SMALL_TIME:
        if C_tau is None:
            raise PreconditionError("small-time prediction needs C(tau)")
        return Prediction(u, tau, s.regime, C_tau * u ** (-s.I_tau) / math.sqrt(log_u),
                          "C(tau) u^-I(tau) / sqrt(log u)")
    if C_M is None:
        raise PreconditionError(f"{s.regime} prediction needs C_M")
    if s.regime == cgf.CRITICAL:
        return Prediction(u, tau, s.regime, 0.5 * C_M * u ** (-s.xi), "C_M u^-xi / 2")
    rep = cgf.regime_report(law, tau)
    curve = None
    if rep.count2_holds:
        base = u ** (-s.I_tau) / math.sqrt(log_u)
        curve = [(k, rep.varrho**k * base) for k in range(k_max + 1)]
    if rep.count1_holds:
        notes.append("count1 holds: no sharp asymptotic for the passage-time interval beyond tau")
    return Prediction(u, tau, s.regime, C_M * u ** (-s.xi), "C_M u^-xi", curve, tuple(notes))
