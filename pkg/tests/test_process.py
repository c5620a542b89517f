import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from perpetuity_fpt import cgf
from perpetuity_fpt.model import build_law
from perpetuity_fpt.process import (
    backward_max_batch,
    default_horizon,
    first_passage,
    forward_batch,
    iterate_pairs,
    n_steps_for,
    passage_batch,
    passage_from_pairs,
    reversal_duality_check,
    risk_duality_check,
    risk_from_pairs,
    simulate_path,
    simulate_risk,
)
from perpetuity_fpt.rng import stream
from perpetuity_fpt.tilt import tilt

finite = st.floats(-50.0, 50.0, allow_nan=False)
positive = st.floats(1e-3, 20.0)
pair_lists = st.lists(st.tuples(positive, finite), min_size=1, max_size=64)


def records(pairs):
    a, b = zip(*pairs) if pairs else ((), ())
    return list(iterate_pairs(a, b))


def test_powers_of_two():
    rec = records([(2, 1)] * 3)[-1]
    assert (rec.Y_n, rec.Pi_n, rec.M_n) == (7.0, 8.0, 7.0)
    for n, r in enumerate(records([(2, 1)] * 40)):
        assert r.Y_n == 2.0**n - 1


def test_zero_steps(ln_law):
    (rec,) = list(simulate_path(ln_law, 0, stream(0)))
    assert (rec.n, rec.Y_n, rec.M_n, rec.Pi_n) == (0, 0.0, 0.0, 1.0)


def test_negative_step_then_recovery():
    r = records([(0.5, -3), (2, 1)])
    assert r[1].Y_n == -3.0
    assert r[2].Y_n == -2.5
    assert r[2].M_n == 0.0
    assert r[2].Ybar_n == 3.5


def test_simulate_path_reproducible(ln_law):
    a = [r.Y_n for r in simulate_path(ln_law, 20, stream(4))]
    b = [r.Y_n for r in simulate_path(ln_law, 20, stream(4))]
    assert a == b


@settings(max_examples=200, deadline=None)
@given(pairs=pair_lists)
def test_record_invariants(pairs):
    recs = records(pairs)
    ys = [r.Y_n for r in recs]
    for k, r in enumerate(recs):
        assert r.M_n >= max(ys[: k + 1]) and r.M_n >= 0
        assert r.Ybar_n >= abs(r.Y_n) * (1 - 1e-12)
        assert r.Mstar_n >= 0
    assert all(b.Ybar_n >= a.Ybar_n for a, b in zip(recs, recs[1:]))


@settings(max_examples=100, deadline=None)
@given(pairs=st.lists(st.tuples(positive, st.floats(1e-3, 10.0)), min_size=2, max_size=40))
def test_increasing_when_b_positive(pairs):
    ys = [r.Y_n for r in records(pairs)]
    assert all(b > a for a, b in zip(ys, ys[1:]))


def test_first_passage_examples():
    out = passage_from_pairs([2.0] * 5, [1.0] * 5, 5.0)
    assert out.hit and out.hit_index == 3
    assert out.T_u == pytest.approx(3 / math.log(5))
    assert round(out.T_u, 3) == 1.864
    miss = passage_from_pairs([0.5] * 50, [1.0] * 50, 5.0)
    assert not miss.hit and miss.hit_index is None


def test_strict_passage():
    # Y_2 = 3 equals u: strict comparison does not hit, non-strict does
    assert not passage_from_pairs([2.0, 2.0], [1.0, 1.0], 3.0).hit
    assert passage_from_pairs([2.0, 2.0], [1.0, 1.0], 3.0, strict=False).hit_index == 2


def test_tilted_weight_at_stopping_index(two_point):
    t = tilt(two_point, math.log2(3))
    out = passage_from_pairs([2.0] * 6, [1.0] * 6, 5.0, tilted=t)
    # hit at n = 3 with S_3 = 3 log 2; lambda(xi) = 1
    assert out.weight == pytest.approx(1 / 27, rel=1e-12)


def test_first_passage_stream(ln_law):
    out = first_passage(ln_law, 50.0, horizon=200, rng=stream(2))
    if out.hit:
        assert out.hit_index <= out.horizon
        assert out.Tbar_u <= out.T_u
    assert out.horizon == 200
    assert first_passage(ln_law, 50.0, rng=stream(2)).horizon == default_horizon(ln_law, 50.0)


def test_passage_batch_matches_single_paths(ln_law):
    """Batch and scalar code agree on identical pairs."""
    rng = stream(6)
    a, b = ln_law.sample(rng, 30)
    single = passage_from_pairs(a, b, 5.0)

    class Replay:
        def __init__(self):
            self.k = 0

        def sample_log(self, _rng, count):
            assert count == 1
            self.k += 1
            return np.log(a[self.k - 1 : self.k]), b[self.k - 1 : self.k]

    batch = passage_batch(Replay(), 5.0, 30, 1, rng)
    assert batch.hit_index[0] == (single.hit_index or 0)


@settings(max_examples=100, deadline=None)
@given(pairs=st.lists(st.tuples(positive, st.floats(1e-3, 10.0)), min_size=1, max_size=40),
       u1=st.floats(1.01, 100.0), u2=st.floats(1.01, 100.0))
def test_monotone_coupling(pairs, u1, u2):
    a, b = zip(*pairs)
    lo, hi = sorted((u1, u2))
    h_lo = passage_from_pairs(a, b, lo)
    h_hi = passage_from_pairs(a, b, hi)
    assert h_lo.hit >= h_hi.hit
    if h_hi.hit:
        assert h_lo.hit_index <= h_hi.hit_index
        # {T_u <= tau} is nondecreasing in tau
        for tau in (0.5, 1.0, 2.0, 4.0):
            hit_tau = h_hi.hit_index <= n_steps_for(hi, tau)
            hit_more = h_hi.hit_index <= n_steps_for(hi, 2 * tau)
            assert hit_more >= hit_tau


@settings(max_examples=100, deadline=None)
@given(pairs=pair_lists, u=st.floats(1.01, 100.0))
def test_tbar_before_t(pairs, u):
    a, b = zip(*pairs)
    out = passage_from_pairs(a, b, u)
    if out.hit:
        assert out.Tbar_u <= out.T_u


def test_n_steps_floor():
    assert n_steps_for(5.0, 2.0) == 3
    assert n_steps_for(math.e**2, 1.5) == 3
    assert n_steps_for(10.0, 0.1) == 0


def test_risk_examples(bounded_law):
    out = risk_from_pairs([2.0, 2.0], [1.0, 1.0], 5.0)
    assert not out.ruined
    zero = risk_from_pairs([2.0], [1.0], 0.0)
    assert zero.ruined and zero.ruin_index == 1
    assert not simulate_risk(bounded_law, 1e9, 10, stream(0)).ruined


def test_reversal_examples():
    assert reversal_duality_check([(2, 1)])
    assert reversal_duality_check([(2, -3), (0.5, 4)])


@settings(max_examples=300, deadline=None)
@given(pairs=pair_lists)
def test_reversal_duality_property(pairs):
    assert reversal_duality_check(pairs)


@settings(max_examples=300, deadline=None)
@given(pairs=pair_lists, u=st.floats(0.0, 100.0))
def test_risk_duality_property(pairs, u):
    assert risk_duality_check(pairs, u)


@pytest.mark.parametrize("name", ["ln_law", "two_point", "bounded_law"])
def test_reversal_duality_random_draws(name, request):
    law = request.getfixturevalue(name)
    rng = stream(13)
    lengths = rng.integers(1, 65, size=300)
    for n in lengths:
        a, b = law.sample(rng, int(n))
        b = b - 1.2 * rng.random(int(n))  # allow negative B
        assert reversal_duality_check(list(zip(a, b)))


def test_forward_backward_same_law(ln_law):
    n, size = 32, 10**5
    m_back, _ = backward_max_batch(ln_law, n, size, stream(1))
    m_fwd = forward_batch(ln_law, n, size, stream(2))
    res = stats.ks_2samp(m_back, m_fwd)
    assert res.statistic < 1.628 * math.sqrt(2 / size)


def test_default_horizon(ln_law):
    assert default_horizon(ln_law, 1e4) == math.ceil(3 * 4 * math.log(1e4))
    assert default_horizon(ln_law, 1e4, 1.0) == math.ceil(4 * math.log(1e4))
    assert cgf.solve_xi(ln_law) == pytest.approx(0.5)
