import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perpetuity_fpt import cgf
from perpetuity_fpt.errors import DomainError, SamplerStallError
from perpetuity_fpt.model import build_law
from perpetuity_fpt.rng import stream
from perpetuity_fpt.tilt import (
    ATOM_REWEIGHT,
    CLOSED_FORM_SHIFT,
    REJECTION,
    likelihood_ratio,
    stopped_weights,
    tilt,
    tilted_sample,
)

XI_TP = math.log2(3)


def test_lognormal_shift(ln_law):
    t = tilt(ln_law, 0.5)
    assert t.sampler_kind == CLOSED_FORM_SHIFT
    assert t.law.params["mean_log_a"] == pytest.approx(0.25, abs=1e-15)
    assert t.normalizer == pytest.approx(1.0, abs=1e-12)


def test_correlated_lognormal_shift_moves_B():
    law = build_law("lognormal_A_lognormal_B", mean_log_a=-0.25, var_log_a=1.0, var_log_b=4.0, corr=0.5)
    t = tilt(law, 0.5)
    assert t.law.params["mean_log_b"] == pytest.approx(0.5 * 0.5 * 2.0)
    la, lb = t.law.sample_log(stream(1), 10**6)
    # B's conditional law given log A is unchanged: regression of log B on log A
    slope = np.cov(la, np.log(lb))[0, 1] / np.var(la)
    assert slope == pytest.approx(0.5 * 2.0 / 1.0, abs=0.01)


def test_two_point_reweight(two_point):
    t = tilt(two_point, XI_TP)
    a, _, p = t.law.atoms()
    assert t.sampler_kind == ATOM_REWEIGHT
    assert p[a == 2.0][0] == pytest.approx(0.75, abs=1e-12)
    assert math.fsum(p) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("name", ["ln_law", "two_point", "bounded_law"])
def test_identity_tilt(name, request):
    law = request.getfixturevalue(name)
    t = tilt(law, 0.0)
    assert t.normalizer == 1.0
    if t.law is not None:
        assert t.law == law


@pytest.mark.parametrize("name, alpha", [("ln_law", 0.7), ("two_point", 1.1), ("bounded_law", 2.0)])
def test_normalizer_matches_profile(name, alpha, request):
    law = request.getfixturevalue(name)
    assert tilt(law, alpha).normalizer == pytest.approx(cgf.cgf_profile(law, alpha).lam, rel=1e-10)


def test_tilted_lognormal_mean(ln_law):
    a, _ = tilted_sample(tilt(ln_law, 0.5), 10**6, seed=3)
    assert abs(np.log(a).mean() - 0.25) < 4e-3


def test_tilted_two_point_frequency(two_point):
    a, _ = tilted_sample(tilt(two_point, XI_TP), 10**6, seed=3)
    assert abs(np.mean(a == 2.0) - 0.75) < 0.0018


def test_tilted_empty(ln_law):
    a, b = tilted_sample(tilt(ln_law, 0.5), 0)
    assert a.size == 0 and b.size == 0


def test_rejection_sampler_moments(bounded_law):
    alpha = 3.0
    t = tilt(bounded_law, alpha)
    assert t.sampler_kind == REJECTION
    la, b = t.sample_log(stream(4), 200_000)
    mu, s2 = cgf.log_moments(bounded_law, alpha)[1:]
    assert abs(la.mean() - mu) < 4 * math.sqrt(s2 / la.size)
    assert np.all((b >= 0.5) & (b <= 1.5))


def test_rejection_stall_raises():
    # the tilt piles all mass at a_hi; a draw from near a_lo is accepted with
    # probability (a_lo/a_hi)**alpha, so a narrow Beta near a_lo stalls
    law = build_law("bounded_density_A_bounded_B", a_lo=0.01, a_hi=10.0, shape1=1.0, shape2=400.0, b_lo=1, b_hi=1)
    with pytest.raises(SamplerStallError):
        tilt(law, 60.0).sample_log(stream(0), 10)


@pytest.mark.parametrize("alpha", [1e200, math.inf, math.nan])
def test_out_of_domain(ln_law, alpha):
    with pytest.raises(DomainError):
        tilt(ln_law, alpha)


def test_likelihood_ratio_examples(ln_law, two_point):
    t = tilt(ln_law, 0.5)
    assert likelihood_ratio(t, 0, 0.0) == 1.0
    assert likelihood_ratio(t, 10, 2.0) == pytest.approx(math.exp(-1.0), rel=1e-12)
    t2 = tilt(two_point, XI_TP)
    assert likelihood_ratio(t2, 3, 3 * math.log(2)) == pytest.approx(1 / 27, rel=1e-12)


def test_stopped_weights_clamp(ln_law):
    w, clamped = stopped_weights(tilt(ln_law, 0.5), np.array([1, 1]), np.array([0.0, -5000.0]))
    assert clamped == 1
    assert w[1] == math.exp(700.0)


def test_inverse_moment_identity(ln_law):
    # E_alpha[(1/A)^alpha] = 1 / lambda(alpha)
    alpha = 0.75
    t = tilt(ln_law, alpha)
    la, _ = t.sample_log(stream(8), 10**6)
    vals = np.exp(-alpha * la)
    assert abs(vals.mean() - 1 / t.normalizer) < 4 * vals.std() / 1000


@pytest.mark.parametrize("n", [6, 12])
def test_unbiasedness_against_enumeration(two_point, n):
    """Weighted tilted average of a path functional equals its exact mean."""
    t = tilt(two_point, 1.2)

    def functional(a):
        y = np.cumsum(np.concatenate([np.ones((a.shape[0], 1)), np.cumprod(a[:, :-1], axis=1)], axis=1), axis=1)
        return (y.max(axis=1) > 4.0).astype(float)

    exact = 0.0
    for combo in itertools.product([2.0, 0.5], repeat=n):
        a = np.array(combo)
        prob = np.prod(np.where(a == 2.0, 0.25, 0.75))
        exact += prob * functional(a[None, :])[0]
    rng = stream(21)
    la, _ = t.sample_log(rng, 200_000 * n)
    la = la.reshape(200_000, n)
    w = np.exp(n * t.log_normalizer - t.alpha * la.sum(axis=1))
    vals = functional(np.exp(la)) * w
    assert abs(vals.mean() - exact) < 4 * vals.std() / math.sqrt(vals.size)


@settings(max_examples=40, deadline=None)
@given(
    probs=st.lists(st.floats(0.01, 1.0), min_size=2, max_size=6),
    alpha=st.floats(-3.0, 3.0),
    data=st.data(),
)
def test_atomic_tilt_normalised(probs, alpha, data):
    atoms = data.draw(st.lists(st.floats(0.05, 20.0), min_size=len(probs), max_size=len(probs)))
    total = math.fsum(probs)
    rows = [[a, 1.0, p / total] for a, p in zip(atoms, probs)]
    rows[-1][2] = 1.0 - math.fsum(r[2] for r in rows[:-1])
    law = build_law("user_table", atoms=rows)
    _, _, q = tilt(law, alpha).law.atoms()
    assert math.fsum(q) == pytest.approx(1.0, abs=1e-12)
