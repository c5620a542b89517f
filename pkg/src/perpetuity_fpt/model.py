"""Input laws for the pair (A, B).

A :class:`PairLaw` is an immutable description of the joint law of one
i.i.d. step ``(A_n, B_n)`` of the affine recursion ``Y -> A Y + B``.
Five families are supported::

    lognormal_A_const_B          log A ~ N(mean_log_a, var_log_a), B = b
    lognormal_A_lognormal_B      (log A, log B) bivariate normal
    two_point_A_const_B          A in a_atoms with probs, B = b
    bounded_density_A_bounded_B  A = a_lo + (a_hi - a_lo) Beta(shape1, shape2),
                                 B ~ Uniform(b_lo, b_hi), independent
    user_table                   finite table of (a, b, p) atoms
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

from .errors import UnsupportedFamilyError, ValidationError
from .rng import as_generator, stream

FAMILIES = (
    "lognormal_A_const_B",
    "lognormal_A_lognormal_B",
    "two_point_A_const_B",
    "bounded_density_A_bounded_B",
    "user_table",
)
ATOMIC_FAMILIES = ("two_point_A_const_B", "user_table")
DENSITY_FAMILIES = ("lognormal_A_const_B", "lognormal_A_lognormal_B", "bounded_density_A_bounded_B")

_PARAMS = {
    "lognormal_A_const_B": {"mean_log_a": None, "var_log_a": None, "b": 1.0},
    "lognormal_A_lognormal_B": {
        "mean_log_a": None,
        "var_log_a": None,
        "mean_log_b": 0.0,
        "var_log_b": 1.0,
        "corr": 0.0,
    },
    "two_point_A_const_B": {"a_atoms": None, "probs": None, "b": 1.0},
    "bounded_density_A_bounded_B": {
        "a_lo": None,
        "a_hi": None,
        "shape1": 1.0,
        "shape2": 1.0,
        "b_lo": None,
        "b_hi": None,
    },
    "user_table": {"atoms": None, "nonarithmetic_logA": True},
}

PROB_TOL = 1e-12
LATTICE_MAX_DENOMINATOR = 64


@dataclass(frozen=True)
class PairLaw:
    family: str
    params: dict = field(hash=False)
    b_positive: bool
    nonarithmetic_logA: bool
    closed_form_cgf: bool

    @property
    def is_atomic(self):
        return self.family in ATOMIC_FAMILIES

    def atoms(self):
        """Return arrays ``(a, b, p)`` of the atoms of an atomic law."""
        p = self.params
        if self.family == "two_point_A_const_B":
            a = np.asarray(p["a_atoms"], dtype=float)
            return a, np.full(a.shape, float(p["b"])), np.asarray(p["probs"], dtype=float)
        if self.family == "user_table":
            t = np.asarray(p["atoms"], dtype=float)
            return t[:, 0], t[:, 1], t[:, 2]
        raise UnsupportedFamilyError(f"{self.family} has no atoms")

    def sample_log(self, rng, count):
        """Draw ``count`` i.i.d. pairs as arrays ``(log A, B)``."""
        rng = as_generator(rng)
        count = int(count)
        p = self.params
        fam = self.family
        if fam == "lognormal_A_const_B":
            la = p["mean_log_a"] + math.sqrt(p["var_log_a"]) * rng.standard_normal(count)
            return la, np.full(count, float(p["b"]))
        if fam == "lognormal_A_lognormal_B":
            z1 = rng.standard_normal(count)
            z2 = rng.standard_normal(count)
            c = p["corr"]
            la = p["mean_log_a"] + math.sqrt(p["var_log_a"]) * z1
            b = np.exp(p["mean_log_b"] + math.sqrt(p["var_log_b"]) * (c * z1 + math.sqrt(1 - c * c) * z2))
            return la, b
        if fam == "bounded_density_A_bounded_B":
            a = p["a_lo"] + (p["a_hi"] - p["a_lo"]) * rng.beta(p["shape1"], p["shape2"], count)
            b = rng.uniform(p["b_lo"], p["b_hi"], count)
            return np.log(a), b
        a, b, prob = self.atoms()
        edges = np.cumsum(prob)[:-1] / prob.sum()
        idx = np.searchsorted(edges, rng.random(count), side="right")
        return np.log(a)[idx], b[idx]

    def sample(self, rng, count):
        """Draw ``count`` i.i.d. pairs; returns arrays ``(A, B)``."""
        la, b = self.sample_log(rng, count)
        return np.exp(la), b

    def a_density(self, a):
        """Density of A for the bounded family (used by quadrature)."""
        if self.family != "bounded_density_A_bounded_B":
            raise UnsupportedFamilyError(f"{self.family} has no tabulated density")
        p = self.params
        width = p["a_hi"] - p["a_lo"]
        return stats.beta.pdf((np.asarray(a) - p["a_lo"]) / width, p["shape1"], p["shape2"]) / width


@dataclass(frozen=True)
class AssumptionReport:
    e_log_A: float
    e_logplus_absB: float
    no_fixed_point: bool
    passes: bool
    e_log_A_stderr: float = 0.0
    method: str = "exact"


def _num(params, name, positive=False, nonneg=False):
    v = params[name]
    try:
        v = float(v)
    except (TypeError, ValueError):
        raise ValidationError(name, f"expected a real number, got {v!r}") from None
    if not math.isfinite(v):
        raise ValidationError(name, "must be finite")
    if positive and v <= 0:
        raise ValidationError(name, f"must be positive, got {v}")
    if nonneg and v < 0:
        raise ValidationError(name, f"must be non-negative, got {v}")
    return v


def _check_probs(probs, name="probs"):
    probs = [float(x) for x in probs]
    if any(q < 0 or not math.isfinite(q) for q in probs):
        raise ValidationError(name, "probabilities must be finite and non-negative")
    total = math.fsum(probs)
    if abs(total - 1.0) > PROB_TOL:
        raise ValidationError(name, f"probabilities sum to {total:.12g}")
    return probs


def lattice_log_values(log_values, max_denominator=LATTICE_MAX_DENOMINATOR):
    """True when the points lie on a common lattice ``h Z`` (detectable cases).

    Zero is on every lattice.  Two or more nonzero values are declared
    arithmetic when every ratio to the first is a rational with denominator
    at most ``max_denominator``.
    """
    vals = [float(x) for x in log_values if abs(float(x)) > 0.0]
    if len(vals) <= 1:
        return True
    ref = vals[0]
    for v in vals[1:]:
        r = v / ref
        frac = Fraction(r).limit_denominator(max_denominator)
        if abs(float(frac) - r) > 1e-12 * max(1.0, abs(r)):
            return False
    return True


def build_law(family, **params):
    """Validate parameters and return a :class:`PairLaw`.

    Raises :class:`ValidationError` naming the offending field.
    """
    if family not in FAMILIES:
        raise ValidationError("family", f"unknown family {family!r}; expected one of {FAMILIES}")
    schema = _PARAMS[family]
    unknown = set(params) - set(schema)
    if unknown:
        raise ValidationError(sorted(unknown)[0], f"unknown parameter for {family}")
    full = {}
    for k, default in schema.items():
        if k in params:
            full[k] = params[k]
        elif default is None:
            raise ValidationError(k, "missing required parameter")
        else:
            full[k] = default

    if family in ("lognormal_A_const_B", "lognormal_A_lognormal_B"):
        full["mean_log_a"] = _num(full, "mean_log_a")
        full["var_log_a"] = _num(full, "var_log_a", nonneg=True)
        if full["var_log_a"] == 0:
            raise ValidationError("var_log_a", "must be positive for a density family")
        if family == "lognormal_A_const_B":
            full["b"] = _num(full, "b")
            b_pos = full["b"] > 0
        else:
            full["mean_log_b"] = _num(full, "mean_log_b")
            full["var_log_b"] = _num(full, "var_log_b", nonneg=True)
            full["corr"] = _num(full, "corr")
            if abs(full["corr"]) > 1:
                raise ValidationError("corr", "must lie in [-1, 1]")
            b_pos = True
        return PairLaw(family, full, b_pos, True, True)

    if family == "two_point_A_const_B":
        atoms = [float(x) for x in full["a_atoms"]]
        if len(atoms) != 2:
            raise ValidationError("a_atoms", "two_point needs exactly two atoms")
        if any(not (x > 0 and math.isfinite(x)) for x in atoms):
            raise ValidationError("a_atoms", "atoms of A must lie in (0, inf)")
        probs = full["probs"]
        if isinstance(probs, (int, float)):
            probs = [float(probs), 1.0 - float(probs)]
        if len(probs) != 2:
            raise ValidationError("probs", "two_point needs two probabilities")
        full["a_atoms"] = atoms
        full["probs"] = _check_probs(probs)
        full["b"] = _num(full, "b")
        nonarith = not lattice_log_values([math.log(x) for x in atoms])
        return PairLaw(family, full, full["b"] > 0, nonarith, True)

    if family == "bounded_density_A_bounded_B":
        for k in ("a_lo", "a_hi", "b_lo", "b_hi"):
            full[k] = _num(full, k)
        full["shape1"] = _num(full, "shape1", positive=True)
        full["shape2"] = _num(full, "shape2", positive=True)
        if full["a_lo"] <= 0:
            raise ValidationError("a_lo", "support of A must lie in (0, inf)")
        if full["a_hi"] <= full["a_lo"]:
            raise ValidationError("a_hi", "must exceed a_lo")
        if full["b_hi"] < full["b_lo"]:
            raise ValidationError("b_hi", "must be at least b_lo")
        if full["shape1"] < 1 or full["shape2"] < 1:
            raise ValidationError("shape1", "shapes below 1 give an unbounded density")
        return PairLaw(family, full, full["b_lo"] > 0, True, False)

    # user_table
    rows = full["atoms"]
    try:
        table = [tuple(float(x) for x in row) for row in rows]
    except (TypeError, ValueError):
        raise ValidationError("atoms", "expected rows of [a, b, p]") from None
    if not table or any(len(r) != 3 for r in table):
        raise ValidationError("atoms", "expected a non-empty list of [a, b, p] rows")
    if any(not (r[0] > 0 and math.isfinite(r[0])) for r in table):
        raise ValidationError("atoms", "atoms of A must lie in (0, inf)")
    if any(not math.isfinite(r[1]) for r in table):
        raise ValidationError("atoms", "atoms of B must be finite")
    _check_probs([r[2] for r in table], "atoms")
    full["atoms"] = [list(r) for r in table]
    full["nonarithmetic_logA"] = bool(full["nonarithmetic_logA"])
    a_vals = sorted({r[0] for r in table if r[2] > 0})
    nonarith = full["nonarithmetic_logA"] and not lattice_log_values([math.log(x) for x in a_vals])
    b_pos = all(r[1] > 0 for r in table if r[2] > 0)
    return PairLaw(family, full, b_pos, nonarith, True)


def law_from_mapping(mapping):
    """Build a law from a ``{"family": ..., **params}`` mapping (config ``[law]``)."""
    mapping = dict(mapping)
    if "family" not in mapping:
        raise ValidationError("family", "missing required key")
    return build_law(mapping.pop("family"), **mapping)


def law_to_mapping(law):
    return {"family": law.family, **law.params}


def _no_fixed_point_atomic(law):
    a, b, p = law.atoms()
    keep = p > 0
    a, b = a[keep], b[keep]
    if np.all(a == 1.0):
        return not np.all(b == 0.0)
    i = int(np.flatnonzero(a != 1.0)[0])
    x = b[i] / (1.0 - a[i])
    resid = a * x + b - x
    return not np.all(np.abs(resid) <= 1e-12 * max(1.0, abs(x)))


def check_assumptions(law, mc_budget=100_000, seed=0):
    """Check ``E log A in (-inf, 0)``, ``E log+|B| < inf`` and ``P{Ax+B=x} < 1``."""
    p = law.params
    fam = law.family
    stderr = 0.0
    method = "exact"
    if fam in ("lognormal_A_const_B", "lognormal_A_lognormal_B"):
        e_log_a = p["mean_log_a"]
        if fam == "lognormal_A_const_B":
            e_lp = max(0.0, math.log(abs(p["b"]))) if p["b"] != 0 else 0.0
        else:
            m, s = p["mean_log_b"], math.sqrt(p["var_log_b"])
            e_lp = m * stats.norm.cdf(m / s) + s * stats.norm.pdf(m / s) if s > 0 else max(m, 0.0)
        no_fp = True
    elif law.is_atomic:
        a, b, prob = law.atoms()
        e_log_a = float(np.sum(prob * np.log(a)))
        absb = np.abs(b)
        with np.errstate(divide="ignore"):
            e_lp = float(np.sum(prob * np.where(absb > 1, np.log(np.where(absb > 0, absb, 1.0)), 0.0)))
        no_fp = _no_fixed_point_atomic(law)
    else:
        rng = stream(seed, 0)
        a, b = law.sample(rng, mc_budget)
        la = np.log(a)
        e_log_a = float(la.mean())
        stderr = float(la.std(ddof=1) / math.sqrt(len(la))) if len(la) > 1 else math.inf
        # B is bounded, so log+|B| has all moments
        e_lp = float(np.mean(np.log(np.maximum(np.abs(b), 1.0))))
        no_fp = True
        method = "monte_carlo"
    passes = (-math.inf < e_log_a < 0) and math.isfinite(e_lp) and no_fp
    return AssumptionReport(float(e_log_a), float(e_lp), bool(no_fp), bool(passes), stderr, method)


def sample_pairs(law, count, stream_id=0, seed=0):
    """i.i.d. pairs for ``(seed, stream_id)``; reproducible."""
    if count < 0:
        raise ValidationError("count", "must be non-negative")
    return law.sample(stream(seed, stream_id), count)


def scale_law(law, t):
    """Law of ``(A / t, B)``: shifts the generating function by ``-alpha log t``."""
    t = float(t)
    if not t > 0:
        raise ValidationError("t", "scale must be positive")
    if law.family not in DENSITY_FAMILIES:
        raise UnsupportedFamilyError(f"scaling needs a density for A; {law.family} is atomic")
    params = dict(law.params)
    if law.family == "bounded_density_A_bounded_B":
        params["a_lo"] = params["a_lo"] / t
        params["a_hi"] = params["a_hi"] / t
    else:
        params["mean_log_a"] = params["mean_log_a"] - math.log(t)
    return build_law(law.family, **params)
