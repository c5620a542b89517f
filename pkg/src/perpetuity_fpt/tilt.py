"""Exponential change of measure on the log A coordinate.

Under the tilted law the pair ``(log A, B)`` has density
``exp(alpha * log a) / lambda(alpha)`` relative to the base law, so the
conditional law of B given A is unchanged and ``log A`` has mean
``mu(alpha)`` and variance ``sigma2(alpha)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import cgf
from .errors import DomainError, SamplerStallError
from .model import PairLaw, build_law
from .rng import as_generator, stream

LOG_CLAMP = 700.0
MAX_CONSECUTIVE_REJECTIONS = 10**6

CLOSED_FORM_SHIFT = "closed_form_shift"
ATOM_REWEIGHT = "atom_reweight"
REJECTION = "rejection"


@dataclass(frozen=True)
class TiltedLaw:
    base: PairLaw
    alpha: float
    normalizer: float
    sampler_kind: str
    log_normalizer: float
    # tilted law in the same family, when one exists
    law: Optional[PairLaw] = None

    def sample_log(self, rng, count):
        rng = as_generator(rng)
        if self.law is not None:
            return self.law.sample_log(rng, count)
        return _rejection_sample(self, rng, int(count))

    def sample(self, rng, count):
        la, b = self.sample_log(rng, count)
        return np.exp(la), b


def tilt(law, alpha):
    """Tilt ``law`` by ``a**alpha / lambda(alpha)``."""
    alpha = float(alpha)
    prof = cgf.cgf_profile(law, alpha)
    if not prof.in_domain:
        raise DomainError(f"lambda({alpha}) is not finite")
    fam = law.family
    p = law.params
    if fam in ("lognormal_A_const_B", "lognormal_A_lognormal_B"):
        params = dict(p)
        params["mean_log_a"] = p["mean_log_a"] + alpha * p["var_log_a"]
        if fam == "lognormal_A_lognormal_B":
            cov = p["corr"] * math.sqrt(p["var_log_a"] * p["var_log_b"])
            params["mean_log_b"] = p["mean_log_b"] + alpha * cov
        return TiltedLaw(law, alpha, prof.lam, CLOSED_FORM_SHIFT, prof.Lambda, build_law(fam, **params))
    if law.is_atomic:
        a, b, prob = law.atoms()
        logw = np.where(prob > 0, np.log(np.where(prob > 0, prob, 1.0)) + alpha * np.log(a), -np.inf)
        q = np.exp(logw - prof.Lambda)
        q = q / math.fsum(q)
        if fam == "two_point_A_const_B":
            tilted = build_law(fam, a_atoms=list(a), probs=[float(q[0]), 1.0 - float(q[0])], b=p["b"])
        else:
            rows = [[float(x), float(y), float(w)] for x, y, w in zip(a, b, q)]
            rows[-1][2] = 1.0 - math.fsum(r[2] for r in rows[:-1])
            tilted = build_law(fam, atoms=rows, nonarithmetic_logA=p["nonarithmetic_logA"])
        return TiltedLaw(law, alpha, prof.lam, ATOM_REWEIGHT, prof.Lambda, tilted)
    return TiltedLaw(law, alpha, prof.lam, REJECTION, prof.Lambda, None)


def _rejection_sample(tilted, rng, count):
    """Accept base draws with probability ``(a / a_ref) ** alpha`` (bounded support)."""
    law = tilted.base
    alpha = tilted.alpha
    if alpha == 0.0:
        return law.sample_log(rng, count)
    ref = math.log(law.params["a_hi"] if alpha > 0 else law.params["a_lo"])
    out_la = np.empty(count)
    out_b = np.empty(count)
    filled = 0
    since_accept = 0
    while filled < count:
        batch = max(64, int(1.5 * (count - filled) / max(tilted.normalizer * math.exp(-alpha * ref), 1e-3)))
        batch = min(batch, 1 << 20)
        la, b = law.sample_log(rng, batch)
        acc = np.log(rng.random(batch)) < alpha * (la - ref)
        idx = np.flatnonzero(acc)
        if idx.size == 0:
            since_accept += batch
            if since_accept > MAX_CONSECUTIVE_REJECTIONS:
                raise SamplerStallError(f"{since_accept} consecutive rejections tilting at alpha={alpha}")
            continue
        since_accept = batch - 1 - idx[-1]
        take = idx[: count - filled]
        out_la[filled : filled + take.size] = la[take]
        out_b[filled : filled + take.size] = b[take]
        filled += take.size
    return out_la, out_b


def tilted_sample(tilted, count, stream_id=0, seed=0):
    return tilted.sample(stream(seed, stream_id), count)


def log_likelihood_ratio(tilted, n, S_n):
    """``n Lambda(alpha) - alpha S_n``: log density of base w.r.t. tilted on n-step paths."""
    return np.asarray(n) * tilted.log_normalizer - tilted.alpha * np.asarray(S_n)


def stopped_weights(tilted, n, S_n):
    """Vectorised likelihood ratios clamped to ``exp(+-700)``; returns ``(weights, n_clamped)``."""
    lw = np.atleast_1d(log_likelihood_ratio(tilted, n, S_n)).astype(float)
    clamped = int(np.count_nonzero(np.abs(lw) > LOG_CLAMP))
    return np.exp(np.clip(lw, -LOG_CLAMP, LOG_CLAMP)), clamped


def likelihood_ratio(tilted, n, S_n):
    """``lambda(alpha)**n * exp(-alpha S_n)``, evaluated in log space."""
    if n < 0:
        raise ValueError("n must be non-negative")
    lw = float(log_likelihood_ratio(tilted, n, S_n))
    return math.exp(min(max(lw, -LOG_CLAMP), LOG_CLAMP))
