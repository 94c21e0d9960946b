from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rearrbmo import (Constant, Cosine, Dimension, DomainError, GridSpec, Indicator, Interval,
                      LogPowBump, SeriesSpec, StabilizationError, StepFunction, ValidationError,
                      decreasing_rearrangement, distribution, essential_inf, is_rearrangeable,
                      rearrange_truncated, sdr_profile, series_ess_inf)
from rearrbmo.rearrange import distribution_curve, series_distribution

import oracles


def test_small_rearrangement_exact():
    s = StepFunction([0.0, 1.0, 3.0, 4.0], [1.0, -3.0, 2.0])
    r = decreasing_rearrangement(s)
    assert np.array_equal(r.fstar.breakpoints, [0.0, 2.0, 3.0, 4.0])
    assert np.array_equal(r.fstar.values, [3.0, 2.0, 1.0])
    assert r.jump_gap == 1.0
    assert essential_inf(r) == 1.0


def test_equal_values_keep_stable_order():
    s = StepFunction([0.0, 1.0, 2.0, 3.0], [2.0, 5.0, 2.0])
    r = decreasing_rearrangement(s)
    assert np.array_equal(r.fstar.values, [5.0, 2.0, 2.0])


def test_distribution_step():
    s = StepFunction([0.0, 1.0, 3.0], [2.0, -1.0])
    assert distribution(s, 0.5) == 3.0
    assert distribution(s, 1.0) == 1.0
    assert distribution(s, 2.0) == 0.0
    assert np.array_equal(distribution_curve(s, [0.5, 1.0, 2.0]), [3.0, 1.0, 0.0])


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_log_distribution_oracle(g_unit, alpha):
    assert distribution(g_unit, alpha) == pytest.approx(oracles.log_mu(alpha), abs=1e-3)


@pytest.mark.parametrize("s", [0.1, 1.0, 1.9])
def test_log_rearrangement_oracle(g_star, s):
    assert g_star(s) == pytest.approx(oracles.log_fstar(s), abs=1e-3)


def test_sdr_profile_line(g_star):
    # on the line omega_1 = 2, so Sf(x) = f*(2|x|) = g(x)
    r = np.array([0.05, 0.3, 0.9])
    assert sdr_profile(g_star, Dimension(1), r) == pytest.approx(-np.log(r), abs=2e-3)
    with pytest.raises(DomainError):
        sdr_profile(g_star, Dimension(1), 1.0)


def test_dimension_volume():
    assert Dimension(1).omega_n == pytest.approx(2.0)
    assert Dimension(2).omega_n == pytest.approx(math.pi)
    assert Dimension(3).omega_n == pytest.approx(4 * math.pi / 3)
    with pytest.raises(ValidationError):
        Dimension(0)


def test_to_csv_and_meta_json():
    r = decreasing_rearrangement(StepFunction([0.0, 1.0, 2.0, 3.0], [0.1, 0.0, 0.0]))
    assert r.to_csv() == "s_left,s_right,value\n0.0,1.0,0.1\n1.0,3.0,0.0\n"
    assert '"truncation_stable": true' in r.meta_json()


step_data = st.integers(1, 48).flatmap(lambda m: st.tuples(
    st.lists(st.floats(0.01, 2.0), min_size=m, max_size=m),
    st.lists(st.floats(-30, 30), min_size=m, max_size=m)))


def _mk(data):
    w, v = data
    return StepFunction(np.concatenate([[0.0], np.cumsum(w)]), v)


@settings(max_examples=150, deadline=None)
@given(step_data, st.lists(st.floats(0, 35), min_size=1, max_size=10))
def test_equimeasurable(data, alphas):
    s = _mk(data)
    r = decreasing_rearrangement(s)
    assert np.all(np.diff(r.fstar.values) <= 0)
    for a in alphas:
        assert distribution(r.fstar, a) == pytest.approx(distribution(s, a), abs=1e-12 * s.domain.length)


@settings(max_examples=150, deadline=None)
@given(step_data, st.integers(0, 2 ** 32 - 1))
def test_l1_non_expansive(data, seed):
    s = _mk(data)
    t = StepFunction(s.breakpoints, np.random.default_rng(seed).normal(0, 10, s.m))
    d_star = decreasing_rearrangement(s).fstar.l1_distance(decreasing_rearrangement(t).fstar)
    assert d_star <= s.l1_distance(t) * (1 + 1e-12) + 1e-12


@settings(max_examples=150, deadline=None)
@given(step_data, st.floats(0, 10), st.floats(0, 10))
def test_truncation_commutes(data, lo, width):
    s = _mk(data)
    hi = lo + width
    lhs = decreasing_rearrangement(abs(s).clamp(lo, hi)).fstar
    rhs = decreasing_rearrangement(s).fstar.clamp(lo, hi)
    mids = np.linspace(0, s.domain.length, 97)[1:-1]
    assert np.allclose(lhs(mids), rhs(mids), atol=1e-12)


# -- half line --------------------------------------------------------------

def test_truncated_exact_when_support_fits():
    f = LogPowBump(1.0, 1.0, 3.0, 1.0)
    r = rearrange_truncated(f, GridSpec(base_cells=4096), 10.0)
    assert r.truncation_stable and r.stable_window is None
    assert r(1.0) == pytest.approx(math.log(2.0), abs=2e-3)


def test_truncated_constant_plateau():
    r = rearrange_truncated(Constant(2.0), GridSpec(base_cells=64), 5.0)
    assert r.ess_inf == 2.0 and r.truncation_stable


def test_truncated_cosine_plus_floor_stabilizes():
    f = Cosine(1.0, 2 * math.pi / 4, 0.0, 0.0)
    r = rearrange_truncated(f, GridSpec(base_cells=4096), 16.0)
    # |cos| is periodic: f* is the rearrangement of one period, infinitely repeated in measure
    assert r.ess_inf == pytest.approx(1.0, abs=1e-3)


def test_truncated_strict_raises():
    # (log x)_+ grows without bound on the half line, so no level set settles
    from rearrbmo import LogRamp
    f = LogRamp(1.0, 1.0, 0.0)
    with pytest.raises(StabilizationError):
        rearrange_truncated(f, GridSpec(base_cells=256), 4.0, strict=True)
    assert not rearrange_truncated(f, GridSpec(base_cells=256), 4.0).truncation_stable


# -- series -----------------------------------------------------------------

G = LogPowBump(1.0, 1.0, 0.0, 1.0)


def test_series_distribution_verdicts():
    ks = np.arange(1, 257)
    conv = SeriesSpec(G, tuple(1.0 / ks), tuple(np.exp(ks)))
    div = SeriesSpec(G, tuple(ks ** -0.5), tuple(np.exp(ks)))
    v = series_distribution(conv, 2.0)
    assert v.verdict == "converges"
    assert v.mu == pytest.approx(2 / (math.exp(1.0) - 1), rel=1e-9)
    assert series_distribution(div, 10.0).verdict == "diverges"
    assert not is_rearrangeable(div, 10.0)["rearrangeable"]
    assert is_rearrangeable(conv, 1.5)["rearrangeable"]
    assert series_ess_inf(conv) == pytest.approx(1.0, abs=1e-6)


def test_short_series_is_finite():
    spec = SeriesSpec(G, (1.0, 1.0), (1.0, 1.0))
    v = series_distribution(spec, 1.0)
    assert v.verdict == "finite" and v.mu == pytest.approx(4 * math.exp(-1))


def test_series_needs_logpow_base():
    spec = SeriesSpec(Indicator(Interval(-1.0, 1.0)), (1.0,), (1.0,))
    with pytest.raises(ValidationError):
        series_distribution(spec, 0.5)
