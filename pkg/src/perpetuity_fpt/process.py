"""Backward and forward recursions, first passage, and the dual risk process.

Backward (perpetuity) sequence, accumulated left to right::

    Y_n = Y_{n-1} + Pi_{n-1} B_n,   Pi_n = Pi_{n-1} A_n,   Y_0 = 0, Pi_0 = 1

Forward sequences::

    Ystar_n = A_n Ystar_{n-1} + B_n,   Mstar_n = (A_n Mstar_{n-1} + B_n)^+

The batch functions simulate many independent paths at once and are what
the estimators use; the ``*_from_pairs`` functions replay a given sequence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from . import cgf
from .rng import as_generator
from .tilt import TiltedLaw, likelihood_ratio

DEFAULT_HORIZON_MULTIPLIER = 3.0


@dataclass(frozen=True)
class PathRecord:
    n: int
    Pi_n: float
    S_n: float
    Y_n: float
    Ybar_n: float
    M_n: float
    Ystar_n: float
    Mstar_n: float


@dataclass(frozen=True)
class PassageOutcome:
    hit: bool
    hit_index: Optional[int]
    T_u: Optional[float]
    Tbar_u: Optional[float]
    weight: float
    horizon: int


@dataclass(frozen=True)
class RuinOutcome:
    ruined: bool
    ruin_index: Optional[int]


def _base_law(source):
    return source.base if isinstance(source, TiltedLaw) else source


def n_steps_for(u, tau):
    """``floor(tau log u)``, the step budget for the scaled time ``tau``."""
    return int(math.floor(tau * math.log(u)))


def default_horizon(law, u, multiplier=DEFAULT_HORIZON_MULTIPLIER):
    """``ceil(multiplier * rho * log u)`` steps."""
    xi = cgf.solve_xi(law)
    rho = 1.0 / cgf.mu(law, xi)
    return max(1, int(math.ceil(multiplier * rho * math.log(u))))


def _exceeds(y, u, strict):
    return y > u if strict else y >= u


# -- single paths ------------------------------------------------------------


def iterate_pairs(a, b) -> Iterator[PathRecord]:
    """Yield the :class:`PathRecord` for ``n = 0, 1, ..., len(a)``."""
    pi, s, y, ybar, m, ys, ms = 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    yield PathRecord(0, pi, s, y, ybar, m, ys, ms)
    for n, (an, bn) in enumerate(zip(a, b), start=1):
        an = float(an)
        bn = float(bn)
        y = y + pi * bn
        ybar = ybar + pi * abs(bn)
        pi = pi * an
        s = s + math.log(an)
        m = max(m, y)
        ys = an * ys + bn
        ms = max(an * ms + bn, 0.0)
        yield PathRecord(n, pi, s, y, ybar, m, ys, ms)


def simulate_path(source, n_steps, rng=None) -> Iterator[PathRecord]:
    """Stream the records of one trajectory of ``source`` (a law or a tilted law)."""
    rng = as_generator(rng)
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    a, b = source.sample(rng, n_steps)
    yield from iterate_pairs(a, b)


def passage_from_pairs(a, b, u, strict=True, tilted=None):
    """First passage of ``Y_n`` (and ``Ybar_n``) above ``u`` along the given pairs."""
    log_u = math.log(u)
    hit_bar = None
    horizon = len(a)
    for rec in iterate_pairs(a, b):
        if rec.n == 0:
            continue
        if hit_bar is None and _exceeds(rec.Ybar_n, u, strict):
            hit_bar = rec.n
        if _exceeds(rec.Y_n, u, strict):
            w = 1.0
            if tilted is not None:
                w = likelihood_ratio(tilted, rec.n, rec.S_n)
            tbar = (hit_bar if hit_bar is not None else rec.n) / log_u
            return PassageOutcome(True, rec.n, rec.n / log_u, tbar, w, horizon)
    w = 1.0
    if tilted is not None and horizon:
        w = likelihood_ratio(tilted, horizon, float(np.sum(np.log(np.asarray(a, dtype=float)))))
    return PassageOutcome(False, None, None, None if hit_bar is None else hit_bar / log_u, w, horizon)


def first_passage(source, u, horizon=None, rng=None, strict=True, block=64):
    """Simulate until ``Y_n > u`` or the horizon; weight is the stopped likelihood ratio."""
    if not u > 1:
        raise ValueError("u must exceed 1")
    rng = as_generator(rng)
    if horizon is None:
        horizon = default_horizon(_base_law(source), u)
    tilted = source if isinstance(source, TiltedLaw) else None
    log_u = math.log(u)
    pi, s, y, ybar = 1.0, 0.0, 0.0, 0.0
    hit_bar = None
    n = 0
    while n < horizon:
        la, b = source.sample_log(rng, min(block, horizon - n))
        for lan, bn in zip(la, b):
            n += 1
            y = y + pi * bn
            ybar = ybar + pi * abs(bn)
            pi = pi * math.exp(lan)
            s = s + lan
            if hit_bar is None and _exceeds(ybar, u, strict):
                hit_bar = n
            if _exceeds(y, u, strict):
                w = 1.0
                if tilted is not None:
                    w = likelihood_ratio(tilted, n, s)
                return PassageOutcome(True, n, n / log_u, (hit_bar or n) / log_u, w, horizon)
    w = 1.0
    if tilted is not None:
        w = likelihood_ratio(tilted, n, s)
    return PassageOutcome(False, None, None, None if hit_bar is None else hit_bar / log_u, w, horizon)


# -- risk process --------------------------------------------------------------


def risk_from_pairs(a, b, u):
    """``U_n = (U_{n-1}/A_n - B_n/A_n)^+`` from ``U_0 = u``; ruin at the first ``U_k <= 0``, ``k >= 1``."""
    v = float(u)
    for k, (an, bn) in enumerate(zip(a, b), start=1):
        v = max(v / an - bn / an, 0.0)
        if v <= 0.0:
            return RuinOutcome(True, k)
    return RuinOutcome(False, None)


def simulate_risk(law, u, n_steps, rng=None):
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    a, b = law.sample(as_generator(rng), n_steps)
    return risk_from_pairs(a, b, u)


# -- duality checks ------------------------------------------------------------


def _exact(x):
    return Fraction(float(x))


def backward_max_exact(pairs):
    """``max(0, Y_1, ..., Y_n)`` in exact rational arithmetic."""
    pi, y, m = Fraction(1), Fraction(0), Fraction(0)
    for a, b in pairs:
        y += pi * _exact(b)
        pi *= _exact(a)
        if y > m:
            m = y
    return m


def forward_max_exact(pairs):
    """``Mstar_n`` in exact rational arithmetic."""
    m = Fraction(0)
    for a, b in pairs:
        m = _exact(a) * m + _exact(b)
        if m < 0:
            m = Fraction(0)
    return m


def reversal_duality_check(pairs):
    """True iff ``M_n`` of the reversed sequence equals ``Mstar_n`` of the original, exactly.

    Both sides are computed in rational arithmetic from the same binary
    floating-point inputs, so equality is exact rather than up to rounding.
    """
    pairs = [(float(a), float(b)) for a, b in pairs]
    return backward_max_exact(pairs[::-1]) == forward_max_exact(pairs)


def risk_duality_check(pairs, u):
    """Ruin of ``U`` by step n (same order) iff ``Y_k >= u`` for some ``1 <= k <= n``.

    Both sides are evaluated exactly.
    """
    pairs = [(_exact(a), _exact(b)) for a, b in pairs]
    v = _exact(u)
    ruined = False
    for a, b in pairs:
        v = max((v - b) / a, Fraction(0))
        if v <= 0:
            ruined = True
            break
    pi, y, reached = Fraction(1), Fraction(0), False
    for a, b in pairs:
        y += pi * b
        pi *= a
        reached = reached or y >= _exact(u)
    return ruined == reached


# -- batches -------------------------------------------------------------------


@dataclass
class PassageBatch:
    """Per-path results of a batch passage simulation (``hit_index == 0`` means no hit)."""

    hit_index: np.ndarray
    log_weight: np.ndarray
    n_paths: int


def passage_batch(source, u, horizon, n_paths, rng, strict=True):
    """Simulate ``n_paths`` backward paths until passage above ``u`` or ``horizon``.

    Returns hit indices and the log stopped likelihood ratio at the hit
    (zero when ``source`` is an untilted law).
    """
    rng = as_generator(rng)
    hit = np.zeros(n_paths, dtype=np.int64)
    logw = np.zeros(n_paths)
    alive = np.arange(n_paths)
    y = np.zeros(n_paths)
    logpi = np.zeros(n_paths)
    tilted = source if isinstance(source, TiltedLaw) else None
    for n in range(1, horizon + 1):
        k = alive.size
        if k == 0:
            break
        la, b = source.sample_log(rng, k)
        y += np.exp(logpi) * b
        logpi += la
        h = y > u if strict else y >= u
        if h.any():
            idx = alive[h]
            hit[idx] = n
            if tilted is not None:
                logw[idx] = n * tilted.log_normalizer - tilted.alpha * logpi[h]
            keep = ~h
            alive = alive[keep]
            y = y[keep]
            logpi = logpi[keep]
    return PassageBatch(hit, logw, n_paths)


def forward_batch(law, n_steps, n_paths, rng, m0=None):
    """Run ``Mstar`` for ``n_steps`` on ``n_paths`` independent chains; returns final values."""
    rng = as_generator(rng)
    m = np.zeros(n_paths) if m0 is None else np.array(m0, dtype=float)
    for _ in range(n_steps):
        a, b = law.sample(rng, n_paths)
        m = np.maximum(a * m + b, 0.0)
    return m


def backward_max_batch(law, n_steps, n_paths, rng, record=()):
    """``M_n = max(0, Y_1..Y_n)`` for many paths; optionally snapshot at steps in ``record``."""
    rng = as_generator(rng)
    y = np.zeros(n_paths)
    pi = np.ones(n_paths)
    m = np.zeros(n_paths)
    snaps = {}
    for n in range(1, n_steps + 1):
        a, b = law.sample(rng, n_paths)
        y += pi * b
        pi *= a
        np.maximum(m, y, out=m)
        if n in record:
            snaps[n] = m.copy()
    return m, snaps
