from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rearrbmo import (DomainError, Interval, StepFunction, ValidationError, double_integral_oscillation,
                      mean_abs_deviation, mean_on, mean_oscillation, median_on, positive_part_oscillation)
from rearrbmo.oscillation import cell_weights, indicator_oscillation

import oracles


def test_constant_has_zero_oscillation():
    s = StepFunction([0.0, 2.0], [3.0])
    assert mean_oscillation(s, Interval(0.5, 1.0)) == 0.0


@pytest.mark.parametrize("rho", [0.1, 0.25, 0.5, 0.9])
def test_indicator_oscillation_closed_form(rho):
    s = StepFunction([-1.0, 0.0, 1.0], [0.0, 1.0])
    S = Interval(-(1 - rho), rho)
    assert mean_oscillation(s, S) == pytest.approx(2 * rho * (1 - rho), abs=1e-15)
    assert indicator_oscillation(rho) == pytest.approx(2 * rho * (1 - rho))


def test_indicator_oscillation_rejects_rho():
    with pytest.raises(ValidationError):
        indicator_oscillation(1.5)


def test_cell_weights_outside_domain():
    s = StepFunction([0.0, 1.0], [1.0])
    with pytest.raises(DomainError):
        cell_weights(s, Interval(0.5, 1.5))
    with pytest.raises(DomainError):
        cell_weights(s, Interval(0.5, 0.5 + 1e-15))


def test_log_oscillation_matches_closed_form(g_unit):
    th = oracles.LOG_SUP_THETA
    S = Interval(-th * 0.5, (1 - th) * 0.5)
    assert mean_oscillation(g_unit, S) == pytest.approx(oracles.log_osc_straddle(th), rel=1e-6)
    assert mean_oscillation(g_unit, Interval(-0.5, 0.5)) == pytest.approx(2 / math.e, rel=1e-6)


def test_median_lower():
    s = StepFunction([0.0, 1.0, 2.0, 3.0, 4.0], [4.0, 1.0, 3.0, 2.0])
    assert median_on(s, s.domain) == 2.0
    assert median_on(s, Interval(0.0, 1.5)) == 4.0


def test_mean_abs_deviation_and_mean():
    s = StepFunction([0.0, 1.0, 3.0], [2.0, -1.0])
    assert mean_on(s, s.domain) == pytest.approx(0.0)
    assert mean_abs_deviation(s, s.domain, 0.0) == pytest.approx(4.0 / 3.0)


cells = st.integers(1, 40).flatmap(lambda m: st.tuples(
    st.lists(st.floats(0.01, 2.0), min_size=m, max_size=m),
    st.lists(st.floats(-20, 20), min_size=m, max_size=m)))


def _mk(data):
    w, v = data
    return StepFunction(np.concatenate([[0.0], np.cumsum(w)]), v)


def _sub(s, u, v):
    D = s.domain
    a, b = sorted((D.a + u * D.length, D.a + v * D.length))
    if b - a < 1e-6 * D.length:
        b = a + 1e-6 * D.length
        if b > D.b:
            a, b = D.b - 1e-6 * D.length, D.b
    return Interval(a, b)


@settings(max_examples=200, deadline=None)
@given(cells, st.floats(0, 1), st.floats(0, 1), st.floats(-100, 100))
def test_oscillation_identities(data, u, v, c):
    s = _mk(data)
    S = _sub(s, u, v)
    O = mean_oscillation(s, S)
    assert positive_part_oscillation(s, S) == pytest.approx(O, abs=1e-9)
    assert mean_oscillation(s + c, S) == pytest.approx(O, abs=1e-9)
    assert mean_oscillation(abs(s), S) <= 2 * O + 1e-9
    med = median_on(s, S)
    dev = mean_abs_deviation(s, S, med)
    assert O <= 2 * dev + 1e-9
    dbl = double_integral_oscillation(s, S)
    assert O - 1e-9 <= dbl <= 2 * O + 1e-9


@settings(max_examples=200, deadline=None)
@given(cells, st.floats(0, 1), st.floats(0, 1), st.floats(-20, 20), st.floats(0, 20))
def test_truncation_never_raises_oscillation(data, u, v, lo, width):
    s = _mk(data)
    S = _sub(s, u, v)
    assert mean_oscillation(s.clamp(lo, lo + width), S) <= mean_oscillation(s, S) + 1e-9


@settings(max_examples=200, deadline=None)
@given(cells, st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_median_minimizes_deviation(data, u, v, w, alpha_frac):
    s = _mk(data)
    S = _sub(s, u, v)
    med = median_on(s, S)
    alpha = s.values.min() + alpha_frac * (s.values.max() - s.values.min())
    assert mean_abs_deviation(s, S, med) <= mean_abs_deviation(s, S, alpha) + 1e-9
