"""Distribution functions and equimeasurable rearrangements.

For a step function the decreasing rearrangement is a sort: the cells are
reordered by ``|value|`` (descending, stable) and laid end to end from
``s = 0``.  Functions on unbounded domains are handled on a truncation
``(x0, x0 + X)`` whose answer is checked against ``(x0, x0 + 2X)``.  Series
descriptors on the whole line get their essential infimum from a
geometric-tail test on the closed-form distribution of their terms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import special

from .errors import DomainError, StabilizationError, ValidationError
from .funcspace import GridSpec, Interval, LogPowBump, Node, SeriesSpec, StepFunction, compile_step

__all__ = [
    "RearrangementResult", "Dimension", "distribution", "distribution_curve",
    "decreasing_rearrangement", "sdr_profile", "is_rearrangeable", "essential_inf",
    "series_ess_inf", "series_distribution", "rearrange_truncated", "rearrange_series",
    "TailVerdict", "EDGE_RTOL",
]

#: drops of f* this close (relative to |Ω|) to either end are not counted as jumps
EDGE_RTOL = 1e-9
TAIL_WINDOW = 64
MAX_DOUBLINGS = 4
STABLE_RTOL = 1e-3


@dataclass(frozen=True)
class RearrangementResult:
    """Decreasing rearrangement ``fstar`` on ``(0, L_dom)`` plus diagnostics.

    ``stable_window`` is set for truncated computations: beyond it ``fstar``
    is the plateau at ``ess_inf`` inferred from the doubling test.
    """

    fstar: StepFunction
    jump_gap: float
    ess_inf: float
    truncation_stable: bool = True
    stable_window: float | None = None

    def __call__(self, s):
        return self.fstar(s)

    def to_csv(self) -> str:
        f = self.fstar.simplify()
        x, v = f.breakpoints, f.values
        lines = ["s_left,s_right,value"]
        lines += [f"{float(x[i])!r},{float(x[i + 1])!r},{float(v[i])!r}" for i in range(v.size)]
        return "\n".join(lines) + "\n"

    def meta(self) -> dict:
        return {"jump_gap": float(self.jump_gap), "ess_inf": float(self.ess_inf),
                "truncation_stable": bool(self.truncation_stable),
                "stable_window": None if self.stable_window is None else float(self.stable_window)}

    def meta_json(self) -> str:
        return json.dumps(self.meta(), sort_keys=True) + "\n"


@dataclass(frozen=True)
class Dimension:
    """Ambient dimension and the volume of its unit ball."""

    n: int = 1

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValidationError("dim", "must be a positive integer")

    @property
    def omega_n(self) -> float:
        n = self.n
        return math.pi ** (n / 2) / special.gamma(n / 2 + 1)


def _sorted_levels(s: StepFunction):
    av = np.abs(s.values)
    order = np.argsort(av, kind="stable")
    lev = av[order]
    # measure strictly above lev[i] is the tail sum past the last tie of lev[i]
    tail = np.concatenate([np.cumsum(s.lengths[order][::-1])[::-1], [0.0]])
    return lev, tail


def distribution_curve(s: StepFunction, alphas) -> np.ndarray:
    """Vectorised :func:`distribution` over many levels."""
    lev, tail = _sorted_levels(s)
    idx = np.searchsorted(lev, np.asarray(alphas, dtype=float), side="right")
    return tail[idx]


def distribution(s: StepFunction, alpha: float) -> float:
    """``|{|s| > alpha}|``, the total length of cells with ``|v| > alpha``."""
    if alpha < 0:
        raise ValidationError("alpha", "must be >= 0")
    av = np.abs(s.values)
    return math.fsum(s.lengths[av > alpha])


def _jump_gap(fstar: StepFunction) -> float:
    v = fstar.values
    if v.size < 2:
        return 0.0
    x = fstar.breakpoints
    drops = v[:-1] - v[1:]
    edge = EDGE_RTOL * (x[-1] - x[0])
    inner = (x[1:-1] - x[0] > edge) & (x[-1] - x[1:-1] > edge)
    return float(drops[inner].max()) if inner.any() else 0.0


def _result(fstar: StepFunction, stable: bool = True, window: float | None = None,
            ess_inf: float | None = None) -> RearrangementResult:
    L = float(fstar.values[-1]) if ess_inf is None else float(ess_inf)
    return RearrangementResult(fstar, _jump_gap(fstar), L, stable, window)


def decreasing_rearrangement(s: StepFunction) -> RearrangementResult:
    """Sort the cells of ``|s|`` by value, largest first, and lay them out from 0."""
    av = np.abs(s.values)
    order = np.argsort(-av, kind="stable")
    lens = s.lengths[order]
    x = np.concatenate([[0.0], np.cumsum(lens)])
    return _result(StepFunction(x, av[order]))


def sdr_profile(r: RearrangementResult, dim: Dimension, radius):
    """Radial profile of the symmetric decreasing rearrangement, ``f*(ω_n |x|^n)``."""
    rad = np.asarray(radius, dtype=float)
    if np.any(rad < 0):
        raise ValidationError("radius", "must be >= 0")
    s = dim.omega_n * rad ** dim.n
    top = r.fstar.breakpoints[-1]
    if np.any(s >= top):
        raise DomainError(f"ω_n·radius^n reaches {float(np.max(s))} >= |domain| = {float(top)}")
    return r.fstar(s)


def essential_inf(r: RearrangementResult) -> float:
    return r.ess_inf


# ---------------------------------------------------------------------------
# series on the whole line


@dataclass(frozen=True)
class TailVerdict:
    verdict: str  # "finite", "converges", "diverges" or "inconclusive"
    mu: float


def _log_terms(spec: SeriesSpec, alpha: float) -> np.ndarray:
    g = spec.base
    if not isinstance(g, LogPowBump):
        raise ValidationError("base", f"closed-form distribution needs a logpow base, got {g.kind!r}")
    a = np.asarray(spec.a) * g.a
    b = np.asarray(spec.b)
    return np.log(b) + math.log(2 * g.b) - (max(alpha, 0.0) / a) ** (1.0 / g.p)


def series_distribution(spec: SeriesSpec, alpha: float) -> TailVerdict:
    """``sum_k b_k mu_g(alpha / a_k)`` with a geometric-tail verdict.

    Up to :data:`TAIL_WINDOW` terms the sum is simply finite.  Longer lists
    are read as a prefix of an infinite series: if the last window of term
    ratios are all ``>= 1`` the series diverges; if they are all ``<= r < 1``
    the remainder is bounded by ``t_K r / (1 - r)`` and added.
    """
    lt = _log_terms(spec, alpha)
    with np.errstate(over="ignore"):
        partial = float(np.sum(np.exp(lt)))
    if lt.size <= TAIL_WINDOW:
        return TailVerdict("finite", partial)
    lr = np.diff(lt)[-TAIL_WINDOW:]
    # log-ratios within rounding of zero count as ratio 1
    noise = 1e-12 * np.maximum(np.abs(lt[-TAIL_WINDOW:]), 1.0)
    if np.all(lr >= -noise):
        return TailVerdict("diverges", math.inf)
    if np.all(lr < 0):
        r = math.exp(lr.max())
        return TailVerdict("converges", partial + math.exp(lt[-1]) * r / (1 - r))
    return TailVerdict("inconclusive", partial)


def is_rearrangeable(spec: SeriesSpec, alpha_probe: float) -> dict:
    """Whether ``mu_f(alpha_probe)`` is finite for the series ``spec``."""
    v = series_distribution(spec, alpha_probe)
    return {"rearrangeable": v.verdict != "diverges" and math.isfinite(v.mu),
            "mu_estimate": v.mu, "verdict": v.verdict}


def series_ess_inf(spec: SeriesSpec, rtol: float = 1e-9) -> float:
    """``inf{alpha : mu_f(alpha) < inf}`` for a long series prefix.

    Bisection on ``alpha`` with the geometric-tail test; raises ``ValueError``
    if the test cannot decide at some probed level.
    """
    def finite(alpha):
        v = series_distribution(spec, alpha).verdict
        if v == "inconclusive":
            raise ValueError(f"geometric-tail test is inconclusive at alpha = {alpha}")
        return v != "diverges"

    if finite(0.0):
        return 0.0
    hi = 1.0
    while not finite(hi):
        hi *= 2
        if hi > 1e12:
            raise ValueError("series is not rearrangeable at any level")
    lo = 0.0
    while hi - lo > rtol * max(hi, 1.0):
        mid = 0.5 * (lo + hi)
        if finite(mid):
            hi = mid
        else:
            lo = mid
    return hi


def rearrange_series(spec: SeriesSpec, grid: GridSpec, tail: SeriesSpec | None = None) -> RearrangementResult:
    """Rearrangement of a retained series prefix, floored at the infinite series' infimum.

    ``spec`` is compiled on the hull of its term supports.  ``tail`` (a longer
    prefix of the same series, defaulting to ``spec``) gives ``L`` through
    :func:`series_ess_inf`; since every level below ``L`` has infinite
    measure for the full series, ``f* >= L`` and values below ``L`` coming
    from the missing terms are raised to ``L``.
    """
    from .funcspace import Series
    f = Series(spec)
    lo, hi = f.support()
    s = compile_step(f, grid, Interval(min(lo, 0.0), hi))
    r = decreasing_rearrangement(s)
    try:
        L = series_ess_inf(tail or spec)
        stable = True
    except ValueError:
        L, stable = float(r.fstar.values[-1]), False
    fstar = r.fstar.clamp(lo=L).simplify() if L > 0 else r.fstar
    return _result(fstar, stable, ess_inf=max(L, float(fstar.values[-1])))


# ---------------------------------------------------------------------------
# truncated unbounded domains


def _stable_level(sx: StepFunction, s2x: StepFunction, rtol: float) -> float:
    """Smallest level above which the two truncations carry the same distribution."""
    lev = np.unique(np.concatenate([[0.0], np.abs(sx.values), np.abs(s2x.values)]))
    m1 = distribution_curve(sx, lev)
    m2 = distribution_curve(s2x, lev)
    agree = np.abs(m1 - m2) <= rtol * np.maximum(np.maximum(m1, m2), 1e-300)
    # the top level always agrees (both measures vanish); take the last disagreement
    bad = np.flatnonzero(~agree)
    return 0.0 if bad.size == 0 else float(lev[bad[-1] + 1])


def rearrange_truncated(f: Node, grid: GridSpec, X: float, x0: float = 0.0,
                        rtol: float = STABLE_RTOL, max_doublings: int = MAX_DOUBLINGS,
                        strict: bool = False) -> RearrangementResult:
    """Rearrangement of ``f`` on the half line ``(x0, inf)`` from truncations.

    When the support of ``f`` fits inside ``(x0, x0 + X)`` the answer is exact.
    Otherwise ``(x0, x0 + X)`` and ``(x0, x0 + 2X)`` are compiled on matching
    meshes; levels whose super-level sets have the same measure on both are
    treated as settled.  Below the settled level ``L`` the sets keep growing,
    so ``f* = L`` past ``W = mu(L)``.  The truncation is doubled until ``L``
    and the profile ``f*`` on ``(0, 2W)`` agree between consecutive doublings
    (relative L¹ change below ``rtol``); if that takes more than
    ``max_doublings`` the result is flagged, or raises with ``strict``.
    """
    lo, hi = f.support()
    if lo >= x0 and hi <= x0 + X:
        return decreasing_rearrangement(compile_step(f, grid, Interval(x0, x0 + X)))

    def profile(Xc, cells):
        s1 = compile_step(f, replace(grid, base_cells=cells), Interval(x0, x0 + Xc))
        s2 = compile_step(f, replace(grid, base_cells=2 * cells), Interval(x0, x0 + 2 * Xc))
        L = _stable_level(s1, s2, rtol)
        W = float(distribution_curve(s1, [L])[0])
        fs = decreasing_rearrangement(s1).fstar
        top = fs.breakpoints[-1]
        if W <= 0:
            fs = StepFunction([0.0, top], [L])
        elif W < top:
            fs = fs.restrict(Interval(0.0, W)).extend(top, L)
        return fs.clamp(lo=L), L, W

    def settled(a, b):
        fa, La, Wa = a
        fb, Lb, Wb = b
        if abs(La - Lb) > rtol * max(abs(La), 1.0):
            return False
        T = min(2 * max(Wa, Wb), fa.breakpoints[-1], fb.breakpoints[-1])
        if T <= 0:
            return True
        I = Interval(0.0, T)
        ra, rb = fa.restrict(I), fb.restrict(I)
        return ra.l1_distance(rb) <= rtol * max(ra.lp_norm(1), 1e-300)

    Xc, cells = float(X), int(grid.base_cells)
    cur = profile(Xc, cells)
    stable = False
    for _ in range(max_doublings):
        nxt = profile(2 * Xc, 2 * cells)
        if settled(cur, nxt):
            stable = True
            break
        Xc, cells, cur = 2 * Xc, 2 * cells, nxt
    fs, L, W = cur
    if not stable and strict:
        raise StabilizationError(f"truncated rearrangement did not settle after {max_doublings} "
                                 f"doublings (last L = {L}, W = {W})")
    return _result(fs, stable, W, ess_inf=L)
