from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sint

from rearrbmo import (Affine, Clamp, Constant, Cosine, DomainError, GridSpec, Indicator, Interval,
                      LogPowBump, LogRamp, Series, SeriesSpec, StepFunction, ValidationError,
                      compile_step, dump_descriptor, evaluate, integrate, load_descriptor,
                      series_build, transform)
from rearrbmo.funcspace import adaptive_gauss, node_from_json


# -- Interval ---------------------------------------------------------------

def test_interval_basics():
    I = Interval(-1.0, 3.0)
    assert I.length == 4.0 and I.center == 1.0
    assert tuple(I) == (-1.0, 3.0)
    assert I.intersect(Interval(2.0, 5.0)) == Interval(2.0, 3.0)
    assert I.intersect(Interval(4.0, 5.0)) is None
    assert I.contains(Interval(0.0, 1.0))


@pytest.mark.parametrize("a,b", [(1.0, 1.0), (2.0, 1.0), (0.0, math.inf), (math.nan, 1.0)])
def test_interval_rejects(a, b):
    with pytest.raises(DomainError):
        Interval(a, b)


# -- StepFunction -----------------------------------------------------------

def test_step_eval_right_continuous():
    s = StepFunction([0.0, 1.0, 2.0], [3.0, 5.0])
    assert s(0.0) == 3.0 and s(1.0) == 5.0 and s(2.0) == 5.0
    assert np.array_equal(s(np.array([0.5, 1.5])), [3.0, 5.0])
    with pytest.raises(DomainError):
        s(2.5)


def test_step_validation():
    with pytest.raises(ValidationError):
        StepFunction([0.0, 1.0], [1.0, 2.0])
    with pytest.raises(ValidationError):
        StepFunction([0.0, 0.0, 1.0], [1.0, 2.0])
    with pytest.raises(ValidationError):
        StepFunction([0.0, 1.0], [math.nan])


def test_step_immutable():
    s = StepFunction([0.0, 1.0], [1.0])
    with pytest.raises(AttributeError):
        s.values = np.array([2.0])
    with pytest.raises(ValueError):
        s.values[0] = 3.0


def test_step_integrate_and_partial_cells():
    s = StepFunction([0.0, 1.0, 3.0], [2.0, -1.0])
    assert s.integrate(Interval(0.0, 3.0)) == pytest.approx(0.0)
    assert integrate(s, (0.5, 2.0)) == pytest.approx(1.0 - 1.0)
    assert integrate(s, (1.5, 1.5)) == 0.0


def test_step_algebra_merges_breakpoints():
    f = StepFunction([0.0, 1.0, 2.0], [1.0, 2.0])
    g = StepFunction([0.0, 0.5, 2.0], [10.0, 20.0])
    h = f + g
    assert np.array_equal(h.breakpoints, [0.0, 0.5, 1.0, 2.0])
    assert np.array_equal(h.values, [11.0, 21.0, 22.0])
    assert np.array_equal((f * g).values, [10.0, 20.0, 40.0])
    assert np.array_equal((-f).values, [-1.0, -2.0])
    assert np.array_equal(abs(f - g).values, [9.0, 19.0, 18.0])


def test_step_combine_domain_mismatch():
    with pytest.raises(DomainError):
        StepFunction([0.0, 1.0], [1.0]) + StepFunction([0.0, 2.0], [1.0])


def test_restrict_extend_simplify():
    s = StepFunction([0.0, 1.0, 2.0, 3.0], [1.0, 1.0, 4.0])
    assert s.simplify().m == 2
    r = s.restrict(Interval(0.5, 2.5))
    assert np.array_equal(r.breakpoints, [0.5, 1.0, 2.0, 2.5])
    e = s.extend(5.0, 0.0)
    assert e.domain == Interval(0.0, 5.0) and e(4.0) == 0.0


def test_norms():
    s = StepFunction([0.0, 1.0, 3.0], [2.0, -1.0])
    assert s.lp_norm(1) == pytest.approx(4.0)
    assert s.lp_norm(2) == pytest.approx(math.sqrt(6.0))
    assert s.lp_norm(math.inf) == 2.0


steps = st.integers(1, 30).flatmap(lambda m: st.tuples(
    st.lists(st.floats(0.01, 3.0), min_size=m, max_size=m),
    st.lists(st.floats(-50, 50), min_size=m, max_size=m)))


def _mk(data):
    w, v = data
    return StepFunction(np.concatenate([[0.0], np.cumsum(w)]), v)


@settings(max_examples=100, deadline=None)
@given(steps, st.floats(0, 1), st.floats(0, 1))
def test_antiderivative_additive(data, u, v):
    s = _mk(data)
    D = s.domain
    a, b = sorted((D.a + u * D.length, D.a + v * D.length))
    c = 0.5 * (a + b)
    tot = integrate(s, (a, b))
    assert tot == pytest.approx(integrate(s, (a, c)) + integrate(s, (c, b)), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(steps)
def test_simplify_preserves_function(data):
    s = _mk(data)
    t = s.simplify()
    mids = 0.5 * (s.breakpoints[1:] + s.breakpoints[:-1])
    assert np.array_equal(s(mids), t(mids))


# -- nodes and compilation --------------------------------------------------

def test_logpow_values_and_mu():
    g = LogPowBump(1.0, 1.0, 0.0, 1.0)
    assert g.values(np.array([math.exp(-2), 1.0, 2.0])).tolist() == pytest.approx([2.0, 0.0, 0.0])
    assert g.mu(1.0) == pytest.approx(2 * math.exp(-1))
    h = LogPowBump(2.0, 0.5, 1.0, 0.5)
    # |x - 1| < 0.5 exp(-(alpha/2)^2)
    assert h.mu(1.0) == pytest.approx(math.exp(-0.25))


@pytest.mark.parametrize("node,lo,hi", [
    (LogPowBump(1.0, 1.0, 0.0, 1.0), 0.0, 0.7),
    (LogPowBump(1.0, 1.0, 0.0, 0.5), 0.0, 0.9),
    (LogPowBump(1.0, 1.0, 0.0, 0.5), -0.3, 0.2),
    (LogPowBump(2.0, 0.5, 1.0, 0.25), 0.55, 1.6),
    (LogRamp(1.0, 2.0, 1.0), 0.0, 20.0),
    (Cosine(1.5, 2.0, 0.3, 0.5), -1.0, 2.0),
    (Affine(2.0, -1.0, Interval(0.0, 1.0)), -1.0, 3.0),
    (Clamp(LogPowBump(1.0, 1.0, 0.0, 1.0), 0.0, 1.0), -1.0, 1.0),
])
def test_cell_integrals_match_quadrature(node, lo, hi):
    ref = sint.quad(lambda x: float(node.values(np.array([x]))[0]), lo, hi,
                    points=[p for p in (0.0, 1.0, 0.5, 1.5, 2.0, -0.5) if lo < p < hi], limit=400)[0]
    got = float(node.integrals(np.array([lo]), np.array([hi]))[0])
    assert got == pytest.approx(ref, rel=1e-8, abs=1e-10)


def test_adaptive_gauss_log_singularity():
    val = adaptive_gauss(lambda x: -np.log(x), 0.0, 1.0, 1e-10)
    assert val == pytest.approx(1.0, rel=1e-8)


def test_compile_preserves_integral_and_mean(g_unit):
    assert g_unit.integrate(g_unit.domain) == pytest.approx(2.0, rel=1e-12)
    assert g_unit.m <= 2 ** 18


def test_compile_indicator_exact():
    s = compile_step(Indicator(Interval(0.0, 1.0)), GridSpec(base_cells=16), Interval(-4.0, 5.0))
    assert s.simplify().m == 3
    assert np.array_equal(s.simplify().values, [0.0, 1.0, 0.0])


def test_compile_rejects_infinite_domain():
    with pytest.raises(DomainError):
        compile_step(Constant(1.0), GridSpec(), (0.0, math.inf))


def test_transform_reproduces_shifted_bump():
    g = LogPowBump(1.0, 1.0, 0.0, 1.0)
    gk = transform(g, 1 / 3, 1.0, -0.5)
    x = np.array([-0.9, -0.5 + 1e-3, 0.2])
    assert gk.values(x) == pytest.approx(g.values(x + 0.5) / 3)
    assert transform(g, 1.0, 1.0, 0.0) is g
    with pytest.raises(ValidationError):
        transform(g, -1.0, 1.0, 0.0)


def test_evaluate_singular_point():
    with pytest.raises(DomainError):
        evaluate(LogPowBump(1.0, 1.0, 0.0, 1.0), 0.0)
    assert evaluate(Indicator(Interval(0.0, 1.0)), 0.5) == 1.0


# -- series -----------------------------------------------------------------

def test_series_default_spacing():
    spec = SeriesSpec(LogPowBump(1.0, 1.0, 0.0, 1.0), (1.0, 1.0, 1.0), (1.0, 2.0, 1.0))
    assert spec.n == (27.0, 54.0, 81.0)
    f = series_build(spec)
    assert len(f.terms) == 3


def test_series_spacing_violation_names_index():
    with pytest.raises(ValidationError) as e:
        SeriesSpec(LogPowBump(1.0, 1.0, 0.0, 1.0), (1.0, 1.0, 1.0), (1.0, 1.0, 1.0), (18.0, 36.0, 40.0))
    assert e.value.field == "n[2]"
    with pytest.raises(ValidationError) as e:
        SeriesSpec(LogPowBump(1.0, 1.0, 0.0, 1.0), (1.0, -1.0), (1.0, 1.0))
    assert e.value.field == "a[2]"


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(1e-3, 1e3), min_size=2, max_size=12))
def test_default_series_supports_disjoint(bs):
    spec = SeriesSpec(LogPowBump(1.0, 1.0, 0.0, 1.0), tuple(1.0 for _ in bs), tuple(bs))
    lo = np.array(spec.n) - np.array(spec.b)
    hi = np.array(spec.n) + np.array(spec.b)
    assert np.all(hi[:-1] <= lo[1:] * (1 + 1e-12))


# -- descriptors ------------------------------------------------------------

DESCRIPTORS = [
    {"domain": [-10, 10], "node": {"kind": "logpow", "a": 1, "b": 1, "x0": 0, "p": 1}},
    {"domain": [-1, 2], "node": {"kind": "clamp", "lo": "-inf", "hi": 1,
                                  "inner": {"kind": "logpow", "a": 1, "b": 1, "x0": 0}}},
    {"domain": [0, 50], "node": {"kind": "series", "base": {"kind": "logpow", "a": 1, "b": 1, "x0": 0},
                                  "a": [1, 0.5], "b": [1, 1], "K": 2}},
    {"domain": [0, 4], "node": {"kind": "sum", "terms": [{"kind": "constant", "c": 2},
                                                         {"kind": "cosine", "amp": 1, "freq": 1,
                                                          "phase": 0, "offset": 0}]}},
]


@pytest.mark.parametrize("d", DESCRIPTORS)
def test_descriptor_round_trip(d):
    node, dom = load_descriptor(d)
    out = dump_descriptor(node, dom)
    node2, dom2 = load_descriptor(out)
    assert dump_descriptor(node2, dom2) == out


@pytest.mark.parametrize("node,field", [
    ({"kind": "logpow", "a": 1, "b": 1, "x0": 0, "p": 2}, "node.p"),
    ({"kind": "martian"}, "node.kind"),
    ({"kind": "sum", "terms": [{"kind": "constant"}]}, "node.terms[0].c"),
    ({"kind": "clamp", "lo": 2, "hi": 1, "inner": {"kind": "constant", "c": 1}}, "node"),
])
def test_descriptor_errors_name_field(node, field):
    with pytest.raises(ValidationError) as e:
        node_from_json(node, "node")
    assert e.value.field.startswith(field)


def test_series_descriptor_keeps_K_terms():
    d = DESCRIPTORS[2]["node"] | {"a": [1, 0.5, 0.25], "b": [1, 1, 1], "K": 2}
    node = node_from_json(d, "node")
    assert isinstance(node, Series) and node.spec.K == 2
