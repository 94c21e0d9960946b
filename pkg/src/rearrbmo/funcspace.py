"""Closed-form function descriptors and their compilation to step functions.

A descriptor is a small immutable tree (bumps, cosines, indicators, affine
pieces, clamps, finite sums and well-spaced series).  Each node knows its
pointwise values, exact cell integrals, nonsmooth points and where its mesh
needs grading.  :func:`compile_step` turns a descriptor into a
:class:`StepFunction` of exact cell averages on a graded mesh, which is the
substrate every other module computes on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import special

from .errors import DomainError, ValidationError

__all__ = [
    "Interval", "GridSpec", "StepFunction", "SeriesSpec",
    "Node", "Constant", "Affine", "LogPowBump", "LogRamp", "Cosine",
    "Indicator", "Clamp", "Sum", "Series",
    "evaluate", "transform", "series_build", "compile_step", "integrate",
    "adaptive_gauss", "node_from_json", "node_to_json",
    "load_descriptor", "dump_descriptor",
]

DEDUP_RTOL = 1e-14


@dataclass(frozen=True)
class Interval:
    """Open interval ``(a, b)`` with finite ``a < b``."""

    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise DomainError(f"interval endpoints must be finite, got ({a}, {b})")
        if not a < b:
            raise DomainError(f"interval needs a < b, got ({a}, {b})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def center(self) -> float:
        return 0.5 * (self.a + self.b)

    def contains(self, other: "Interval", atol: float = 0.0) -> bool:
        return other.a >= self.a - atol and other.b <= self.b + atol

    def intersect(self, other: "Interval") -> "Interval | None":
        a, b = max(self.a, other.a), min(self.b, other.b)
        return Interval(a, b) if a < b else None

    def __iter__(self):
        yield self.a
        yield self.b


@dataclass(frozen=True)
class GridSpec:
    """Mesh controls for :func:`compile_step`.

    ``grading`` is the ratio between successive cell sizes as the mesh closes
    in on a logarithmic singularity (or fans out along a logarithmic ramp);
    ``min_cell`` defaults to ``1e-12 * |domain|``.  ``quad_tol`` bounds the
    per-cell error of the numerical fallback quadrature.
    """

    base_cells: int = 65536
    grading: float = 0.99
    min_cell: float | None = None
    quad_tol: float = 1e-10

    def __post_init__(self):
        if int(self.base_cells) < 1:
            raise ValidationError("base_cells", "must be a positive integer")
        if not 0.0 < self.grading < 1.0:
            raise ValidationError("grading", "must lie in (0, 1)")
        if self.min_cell is not None and not self.min_cell > 0:
            raise ValidationError("min_cell", "must be > 0")
        if not self.quad_tol > 0:
            raise ValidationError("quad_tol", "must be > 0")


# ---------------------------------------------------------------------------
# step functions


def _dedupe(x: np.ndarray, tol: float) -> np.ndarray:
    """Sorted copy of ``x`` with points closer than ``tol`` merged; keeps both ends."""
    x = np.unique(x)
    if x.size < 2:
        return x
    keep = np.empty(x.size, dtype=bool)
    keep[0] = True
    # greedy thinning relative to the last kept point
    gaps = np.diff(x) > tol
    if gaps.all():
        return x
    last = x[0]
    for i in range(1, x.size):
        keep[i] = x[i] - last > tol
        if keep[i]:
            last = x[i]
    out = x[keep]
    if out[-1] != x[-1]:
        out[-1] = x[-1]
    return out


class StepFunction:
    """Piecewise-constant function on a finite interval.

    ``values[i]`` is the value on ``(breakpoints[i], breakpoints[i+1])``.
    Point evaluation is right-continuous; the right endpoint of the domain
    takes the last value.  Instances are immutable.
    """

    __slots__ = ("breakpoints", "values", "_prefix")

    def __init__(self, breakpoints, values):
        x = np.array(breakpoints, dtype=float)
        v = np.array(values, dtype=float)
        if x.ndim != 1 or v.ndim != 1 or x.size != v.size + 1 or v.size < 1:
            raise ValidationError("breakpoints", "need m+1 breakpoints for m >= 1 values")
        if not np.all(np.isfinite(x)):
            raise ValidationError("breakpoints", "must be finite")
        if not np.all(np.diff(x) > 0):
            raise ValidationError("breakpoints", "must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValidationError("values", "must be finite")
        x.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "breakpoints", x)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "_prefix", None)

    def __setattr__(self, name, value):
        raise AttributeError("StepFunction is immutable")

    def __repr__(self):
        return f"StepFunction(domain=({float(self.breakpoints[0])!r}, {float(self.breakpoints[-1])!r}), m={self.m})"

    @classmethod
    def constant(cls, domain: Interval, c: float) -> "StepFunction":
        return cls([domain.a, domain.b], [c])

    @property
    def domain(self) -> Interval:
        return Interval(self.breakpoints[0], self.breakpoints[-1])

    @property
    def m(self) -> int:
        return self.values.size

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    @property
    def prefix(self) -> np.ndarray:
        """Cumulative integral at each breakpoint."""
        if self._prefix is None:
            p = np.concatenate([[0.0], np.cumsum(self.values * self.lengths)])
            p.setflags(write=False)
            object.__setattr__(self, "_prefix", p)
        return self._prefix

    def cell_index(self, x) -> np.ndarray:
        """Index of the cell ``[x_i, x_{i+1})`` holding each point."""
        i = np.searchsorted(self.breakpoints, x, side="right") - 1
        return np.clip(i, 0, self.m - 1)

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        lo, hi = self.breakpoints[0], self.breakpoints[-1]
        if np.any(xa < lo) or np.any(xa > hi):
            raise DomainError(f"evaluation outside [{lo}, {hi}]")
        out = self.values[self.cell_index(xa)]
        return float(out) if out.ndim == 0 else out

    def antiderivative(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        i = self.cell_index(x)
        return self.prefix[i] + self.values[i] * (x - self.breakpoints[i])

    def integrate(self, S: Interval) -> float:
        return integrate(self, S)

    def simplify(self) -> "StepFunction":
        """Merge neighbouring cells carrying exactly the same value."""
        v = self.values
        if v.size == 1:
            return self
        keep = np.concatenate([[True], v[1:] != v[:-1]])
        if keep.all():
            return self
        idx = np.flatnonzero(keep)
        x = np.concatenate([self.breakpoints[idx], [self.breakpoints[-1]]])
        return StepFunction(x, v[idx])

    def refine(self, points) -> "StepFunction":
        """Same function on a breakpoint set enlarged by ``points``."""
        D = self.domain
        p = np.asarray(points, dtype=float)
        p = p[(p > D.a) & (p < D.b)]
        x = _dedupe(np.concatenate([self.breakpoints, p]), DEDUP_RTOL * D.length)
        mids = 0.5 * (x[:-1] + x[1:])
        return StepFunction(x, self.values[self.cell_index(mids)])

    def restrict(self, S: Interval) -> "StepFunction":
        D = self.domain
        if not D.contains(S, atol=DEDUP_RTOL * D.length):
            raise DomainError(f"({S.a}, {S.b}) is not inside ({D.a}, {D.b})")
        a, b = max(S.a, D.a), min(S.b, D.b)
        inner = self.breakpoints[(self.breakpoints > a) & (self.breakpoints < b)]
        x = _dedupe(np.concatenate([[a], inner, [b]]), DEDUP_RTOL * (b - a))
        mids = 0.5 * (x[:-1] + x[1:])
        return StepFunction(x, self.values[self.cell_index(mids)])

    def extend(self, b: float, value: float) -> "StepFunction":
        """Append a constant cell up to ``b`` on the right."""
        if b <= self.breakpoints[-1]:
            return self
        return StepFunction(np.append(self.breakpoints, b), np.append(self.values, value))

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "StepFunction":
        return StepFunction(self.breakpoints, fn(self.values))

    def combine(self, other: "StepFunction", op) -> "StepFunction":
        """Cellwise ``op(self, other)`` on the merged breakpoint set."""
        D, E = self.domain, other.domain
        tol = 1e-12 * max(D.length, E.length)
        if abs(D.a - E.a) > tol or abs(D.b - E.b) > tol:
            raise DomainError(f"domain mismatch: ({D.a}, {D.b}) vs ({E.a}, {E.b})")
        x = _dedupe(np.concatenate([self.breakpoints, other.breakpoints]), DEDUP_RTOL * D.length)
        mids = 0.5 * (x[:-1] + x[1:])
        v = op(self.values[self.cell_index(mids)], other.values[other.cell_index(mids)])
        return StepFunction(x, v)

    def __add__(self, other):
        if isinstance(other, StepFunction):
            return self.combine(other, np.add)
        return self.map(lambda v: v + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, StepFunction):
            return self.combine(other, np.subtract)
        return self.map(lambda v: v - float(other))

    def __rsub__(self, other):
        return self.map(lambda v: float(other) - v)

    def __mul__(self, c):
        if isinstance(c, StepFunction):
            return self.combine(c, np.multiply)
        return self.map(lambda v: v * float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return self.map(np.negative)

    def __abs__(self):
        return self.map(np.abs)

    def clamp(self, lo: float = -math.inf, hi: float = math.inf) -> "StepFunction":
        return self.map(lambda v: np.minimum(np.maximum(v, lo), hi))

    def positive_part(self) -> "StepFunction":
        return self.map(lambda v: np.maximum(v, 0.0))

    def lp_norm(self, p: float) -> float:
        av = np.abs(self.values)
        if math.isinf(p):
            return float(av.max())
        return float(np.sum(av ** p * self.lengths) ** (1.0 / p))

    def l1_distance(self, other: "StepFunction", window: Interval | None = None) -> float:
        d = abs(self - other)
        if window is not None:
            d = d.restrict(window)
        return d.lp_norm(1)

    def same_as(self, other: "StepFunction", atol: float = 1e-12) -> bool:
        """Pointwise equality up to ``atol`` on the merged breakpoints."""
        try:
            d = self - other
        except DomainError:
            return False
        return bool(np.all(np.abs(d.values) <= atol))


def integrate(s: StepFunction, S: Interval | tuple[float, float]) -> float:
    """Exact integral of ``s`` over ``S`` via prefix sums.

    ``S`` may also be a plain ``(a, b)`` pair, in which case ``a == b`` is
    allowed and integrates to zero.
    """
    Sa, Sb = (float(v) for v in S)
    if Sb < Sa:
        raise DomainError(f"({Sa}, {Sb}) has b < a")
    D = s.domain
    tol = DEDUP_RTOL * D.length
    if Sa < D.a - tol or Sb > D.b + tol:
        raise DomainError(f"({Sa}, {Sb}) is not inside ({D.a}, {D.b})")
    a, b = max(Sa, D.a), min(Sb, D.b)
    if b <= a:
        return 0.0
    F = s.antiderivative([a, b])
    return float(F[1] - F[0])


# ---------------------------------------------------------------------------
# quadrature fallback

_GL = {n: np.polynomial.legendre.leggauss(n) for n in (7, 15)}


def adaptive_gauss(func: Callable[[np.ndarray], np.ndarray], lo, hi, tol: float,
                   max_depth: int = 40) -> np.ndarray:
    """Integrals of ``func`` over many cells at once.

    Each cell is bisected until the 7- and 15-point Gauss-Legendre rules agree
    to within its share of ``tol``.  ``func`` must accept a flat array.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    total = np.zeros(lo.size)
    owner = np.arange(lo.size)
    width0 = hi - lo
    a, b = lo.copy(), hi.copy()
    for depth in range(max_depth + 1):
        if a.size == 0:
            break
        half, mid = 0.5 * (b - a), 0.5 * (a + b)
        ests = []
        for n in (7, 15):
            t, w = _GL[n]
            pts = mid[:, None] + half[:, None] * t[None, :]
            ests.append(half * (func(pts.ravel()).reshape(pts.shape) @ w))
        err = np.abs(ests[1] - ests[0])
        share = tol * np.where(width0[owner] > 0, (b - a) / width0[owner], 1.0)
        done = (err <= share) | (depth == max_depth)
        np.add.at(total, owner[done], ests[1][done])
        todo = ~done
        a, b, owner, mid = a[todo], b[todo], owner[todo], mid[todo]
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
        owner = np.concatenate([owner, owner])
    return total


# ---------------------------------------------------------------------------
# descriptor nodes


def _num(x) -> float:
    return float(x)


def _clip_len(lo, hi, s_lo, s_hi):
    return np.maximum(np.minimum(hi, s_hi) - np.maximum(lo, s_lo), 0.0)


class Node:
    """Base class for descriptor nodes."""

    kind: str = ""

    def values(self, x: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def integrals(self, lo: np.ndarray, hi: np.ndarray, quad_tol: float = 1e-10) -> np.ndarray:
        raise NotImplementedError  # pragma: no cover

    def children(self) -> tuple["Node", ...]:
        return ()

    def breaks(self) -> list[float]:
        out: list[float] = []
        for c in self.children():
            out.extend(c.breaks())
        return out

    def singular_points(self) -> list[float]:
        out: list[float] = []
        for c in self.children():
            out.extend(c.singular_points())
        return out

    def mesh(self, lo: float, hi: float, ratio: float, min_cell: float) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for c in self.children():
            out.extend(c.mesh(lo, hi, ratio, min_cell))
        return out

    def crossings(self, nodes: np.ndarray) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for c in self.children():
            out.extend(c.crossings(nodes))
        return out

    def support(self) -> tuple[float, float]:
        """Closed hull outside which the function vanishes (may be infinite)."""
        lo, hi = math.inf, -math.inf
        for c in self.children():
            a, b = c.support()
            lo, hi = min(lo, a), max(hi, b)
        return lo, hi

    def transformed(self, a: float, b: float, x0: float) -> "Node":
        raise NotImplementedError  # pragma: no cover


@dataclass(frozen=True)
class Constant(Node):
    c: float
    kind = "constant"

    def __post_init__(self):
        object.__setattr__(self, "c", _num(self.c))

    def values(self, x):
        return np.full(np.shape(x), self.c)

    def integrals(self, lo, hi, quad_tol=1e-10):
        return self.c * (hi - lo)

    def support(self):
        return (math.inf, -math.inf) if self.c == 0 else (-math.inf, math.inf)

    def transformed(self, a, b, x0):
        return Constant(a * self.c)


@dataclass(frozen=True)
class Affine(Node):
    """``slope * x + intercept`` on ``support``, zero elsewhere."""

    slope: float
    intercept: float
    support_: Interval
    kind = "affine"

    def __post_init__(self):
        object.__setattr__(self, "slope", _num(self.slope))
        object.__setattr__(self, "intercept", _num(self.intercept))

    def values(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > self.support_.a) & (x < self.support_.b)
        return np.where(inside, self.slope * x + self.intercept, 0.0)

    def integrals(self, lo, hi, quad_tol=1e-10):
        l = np.clip(lo, self.support_.a, self.support_.b)
        u = np.clip(hi, self.support_.a, self.support_.b)
        return (u - l) * (0.5 * self.slope * (u + l) + self.intercept)

    def breaks(self):
        return [self.support_.a, self.support_.b]

    def support(self):
        if self.slope == 0 and self.intercept == 0:
            return math.inf, -math.inf
        return self.support_.a, self.support_.b

    def transformed(self, a, b, x0):
        s = Interval(x0 + b * self.support_.a, x0 + b * self.support_.b)
        return Affine(a * self.slope / b, a * (self.intercept - self.slope * x0 / b), s)


@dataclass(frozen=True)
class LogPowBump(Node):
    """``a * ((-log(|x - x0| / b))_+) ** p``, supported on ``(x0 - b, x0 + b)``."""

    a: float
    b: float
    x0: float
    p: float = 1.0
    kind = "logpow"

    def __post_init__(self):
        for name in ("a", "b", "x0", "p"):
            object.__setattr__(self, name, _num(getattr(self, name)))
        if not self.a > 0:
            raise ValidationError("a", "must be > 0")
        if not self.b > 0:
            raise ValidationError("b", "must be > 0")
        if not 0 < self.p <= 1:
            raise ValidationError("p", "must lie in (0, 1]")

    def values(self, x):
        x = np.asarray(x, dtype=float)
        r = np.abs(x - self.x0) / self.b
        with np.errstate(divide="ignore"):
            u = np.maximum(-np.log(r), 0.0)
        return self.a * (u if self.p == 1 else u ** self.p)

    def mu(self, alpha):
        """Closed-form distribution function ``|{|g| > alpha}|``."""
        alpha = np.asarray(alpha, dtype=float)
        return 2 * self.b * np.exp(-np.maximum(alpha / self.a, 0.0) ** (1.0 / self.p))

    def _G(self, t):
        # integral of ((-log(tau/b))_+)^p over (0, t), t >= 0
        b, p = self.b, self.p
        t = np.minimum(t, b)
        with np.errstate(divide="ignore", invalid="ignore"):
            u0 = np.log(b / t)
            if p == 1:
                g = t * (1.0 + u0)
            else:
                g = b * special.gamma(p + 1) * special.gammaincc(p + 1, u0)
        return np.where(t > 0, g, 0.0)

    def _K(self, t):
        # integral over (t, b): complement of _G, accurate near the support edge
        b, p = self.b, self.p
        with np.errstate(divide="ignore", invalid="ignore"):
            u0 = np.log(b / np.minimum(t, b))
            k = b * special.gamma(p + 1) * special.gammainc(p + 1, u0)
        return np.where(t < b, k, 0.0)

    def integrals(self, lo, hi, quad_tol=1e-10):
        yl = np.asarray(lo, dtype=float) - self.x0
        yu = np.asarray(hi, dtype=float) - self.x0
        same = yl * yu >= 0
        # reflect left-side cells onto the right
        mirror = same & (yu <= 0)
        tl = np.where(mirror, -yu, yl)
        tu = np.where(mirror, -yl, yu)
        outer = tl >= self.b / math.e
        side = np.where(outer, self._K(tl) - self._K(tu), self._G(tu) - self._G(tl))
        straddle = self._G(np.abs(yu)) + self._G(np.abs(yl))
        return self.a * np.where(same, side, straddle)

    def breaks(self):
        return [self.x0 - self.b, self.x0, self.x0 + self.b]

    def singular_points(self):
        return [self.x0]

    def mesh(self, lo, hi, ratio, min_cell):
        out = []
        top = min(self.b, max(abs(hi - self.x0), abs(lo - self.x0)))
        if top > min_cell:
            n = int(math.floor(math.log(min_cell / top) / math.log(ratio))) + 1
            d = top * ratio ** np.arange(n)
            out += [self.x0 + d, self.x0 - d]
        if self.p < 1:
            # the (.)^p cusp at the support edges also needs grading
            floor = max(min_cell, 1e-9 * self.b)
            n = max(int(math.floor(math.log(floor / (0.5 * self.b)) / math.log(ratio))) + 1, 1)
            e = 0.5 * self.b * ratio ** np.arange(n)
            out += [self.x0 + self.b - e, self.x0 - self.b + e]
        return out

    def support(self):
        return self.x0 - self.b, self.x0 + self.b

    def transformed(self, a, b, x0):
        return LogPowBump(a * self.a, b * self.b, x0 + b * self.x0, self.p)


@dataclass(frozen=True)
class LogRamp(Node):
    """``a * (log((x - x0) / b))_+`` for ``x > x0``, zero for ``x <= x0``.

    The increasing logarithm on a half line; ``a`` may be negative.
    """

    a: float
    b: float
    x0: float
    kind = "logramp"

    def __post_init__(self):
        for name in ("a", "b", "x0"):
            object.__setattr__(self, name, _num(getattr(self, name)))
        if not self.b > 0:
            raise ValidationError("b", "must be > 0")

    def values(self, x):
        y = (np.asarray(x, dtype=float) - self.x0) / self.b
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(y > 1, np.log(np.where(y > 1, y, 1.0)), 0.0)
        return self.a * v

    def _R(self, y):
        yy = np.maximum(y, 1.0)
        return yy * np.log(yy) - yy + 1.0

    def integrals(self, lo, hi, quad_tol=1e-10):
        yl = (np.asarray(lo, dtype=float) - self.x0) / self.b
        yu = (np.asarray(hi, dtype=float) - self.x0) / self.b
        return self.a * self.b * (self._R(yu) - self._R(yl))

    def breaks(self):
        return [self.x0 + self.b]

    def mesh(self, lo, hi, ratio, min_cell):
        start = self.x0 + self.b
        if hi <= start:
            return []
        n = int(math.ceil(math.log((hi - self.x0) / self.b) / -math.log(ratio))) + 1
        return [self.x0 + self.b * ratio ** -np.arange(n, dtype=float)]

    def support(self):
        return (math.inf, -math.inf) if self.a == 0 else (self.x0 + self.b, math.inf)

    def transformed(self, a, b, x0):
        return LogRamp(a * self.a, b * self.b, x0 + b * self.x0)


@dataclass(frozen=True)
class Cosine(Node):
    """``amp * cos(freq * x + phase) + offset`` on ``support`` (``None``: everywhere)."""

    amp: float
    freq: float
    phase: float = 0.0
    offset: float = 0.0
    support_: Interval | None = None
    kind = "cosine"

    def __post_init__(self):
        for name in ("amp", "freq", "phase", "offset"):
            object.__setattr__(self, name, _num(getattr(self, name)))

    def _inside(self, x):
        if self.support_ is None:
            return np.ones(np.shape(x), dtype=bool)
        return (x > self.support_.a) & (x < self.support_.b)

    def values(self, x):
        x = np.asarray(x, dtype=float)
        v = self.amp * np.cos(self.freq * x + self.phase) + self.offset
        return np.where(self._inside(x), v, 0.0)

    def integrals(self, lo, hi, quad_tol=1e-10):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if self.support_ is not None:
            lo = np.clip(lo, self.support_.a, self.support_.b)
            hi = np.clip(hi, self.support_.a, self.support_.b)
        w = hi - lo
        mid = 0.5 * (lo + hi)
        if self.freq == 0:
            osc = self.amp * math.cos(self.phase) * w
        else:
            # sin(B) - sin(A) = 2 cos((A+B)/2) sin((B-A)/2)
            osc = (2 * self.amp / self.freq) * np.cos(self.freq * mid + self.phase) \
                * np.sin(0.5 * self.freq * w)
        return osc + self.offset * w

    def breaks(self):
        return [] if self.support_ is None else [self.support_.a, self.support_.b]

    def support(self):
        if self.amp == 0 and self.offset == 0:
            return math.inf, -math.inf
        if self.support_ is None:
            return -math.inf, math.inf
        return self.support_.a, self.support_.b

    def transformed(self, a, b, x0):
        s = None if self.support_ is None else Interval(x0 + b * self.support_.a,
                                                        x0 + b * self.support_.b)
        return Cosine(a * self.amp, self.freq / b, self.phase - self.freq * x0 / b,
                      a * self.offset, s)


@dataclass(frozen=True)
class Indicator(Node):
    support_: Interval
    kind = "indicator"

    def values(self, x):
        x = np.asarray(x, dtype=float)
        return ((x > self.support_.a) & (x < self.support_.b)).astype(float)

    def integrals(self, lo, hi, quad_tol=1e-10):
        return _clip_len(lo, hi, self.support_.a, self.support_.b)

    def breaks(self):
        return [self.support_.a, self.support_.b]

    def support(self):
        return self.support_.a, self.support_.b

    def transformed(self, a, b, x0):
        s = Interval(x0 + b * self.support_.a, x0 + b * self.support_.b)
        return Indicator(s) if a == 1 else Affine(0.0, a, s)


def _bisect_roots(h: Callable[[np.ndarray], np.ndarray], xl: np.ndarray, xr: np.ndarray,
                  iters: int = 80) -> np.ndarray:
    """Vectorised bisection for sign changes of ``h`` on ``[xl, xr]``."""
    sl = np.sign(h(xl))
    for _ in range(iters):
        xm = 0.5 * (xl + xr)
        sm = np.sign(h(xm))
        left = sm == sl
        xl = np.where(left, xm, xl)
        xr = np.where(left, xr, xm)
        if np.all(xr - xl <= 4e-16 * np.maximum(np.abs(xl), 1e-300)):
            break
    return 0.5 * (xl + xr)


@dataclass(frozen=True)
class Clamp(Node):
    """``min(max(inner, lo), hi)``."""

    inner: Node
    lo: float = -math.inf
    hi: float = math.inf
    kind = "clamp"

    def __post_init__(self):
        object.__setattr__(self, "lo", _num(self.lo))
        object.__setattr__(self, "hi", _num(self.hi))
        if not self.lo < self.hi:
            raise ValidationError("lo", "clamp needs lo < hi")

    def children(self):
        return (self.inner,)

    def values(self, x):
        return np.minimum(np.maximum(self.inner.values(x), self.lo), self.hi)

    def crossings(self, nodes):
        out = self.inner.crossings(nodes)
        pts = np.union1d(nodes, 0.5 * (nodes[:-1] + nodes[1:]))
        with np.errstate(invalid="ignore"):
            vals = self.inner.values(pts)
        for level in (self.lo, self.hi):
            if not math.isfinite(level):
                continue
            s = np.sign(vals - level)
            idx = np.flatnonzero(s[:-1] * s[1:] < 0)
            if idx.size:
                out.append(_bisect_roots(lambda x: self.inner.values(x) - level,
                                         pts[idx].copy(), pts[idx + 1].copy()))
        return out

    def integrals(self, lo, hi, quad_tol=1e-10):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        w = hi - lo
        probes = [lo + t * w for t in (0.5, 0.02, 0.98)]
        cls = []
        for p in probes:
            v = self.inner.values(p)
            # -1 clamped at lo, 0 free, +1 clamped at hi
            cls.append(np.where(v >= self.hi, 1, np.where(v <= self.lo, -1, 0)))
        out = np.where(cls[0] > 0, self.hi * w, np.where(cls[0] < 0, self.lo * w, 0.0))
        free = cls[0] == 0
        consistent = (cls[1] == cls[0]) & (cls[2] == cls[0])
        fi = np.flatnonzero(free & consistent)
        if fi.size:
            out[fi] = self.inner.integrals(lo[fi], hi[fi], quad_tol)
        amb = np.flatnonzero(~consistent)
        if amb.size:
            out[amb] = adaptive_gauss(self.values, lo[amb], hi[amb], quad_tol)
        return out

    def support(self):
        if self.lo <= 0 <= self.hi:
            return self.inner.support()
        return -math.inf, math.inf

    def transformed(self, a, b, x0):
        return Clamp(self.inner.transformed(a, b, x0), a * self.lo, a * self.hi)


@dataclass(frozen=True)
class Sum(Node):
    terms: tuple[Node, ...]
    kind = "sum"

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValidationError("terms", "sum needs at least one term")

    def children(self):
        return self.terms

    def values(self, x):
        out = self.terms[0].values(x)
        for t in self.terms[1:]:
            out = out + t.values(x)
        return out

    def integrals(self, lo, hi, quad_tol=1e-10):
        out = self.terms[0].integrals(lo, hi, quad_tol)
        for t in self.terms[1:]:
            out = out + t.integrals(lo, hi, quad_tol)
        return out

    def transformed(self, a, b, x0):
        return Sum(tuple(t.transformed(a, b, x0) for t in self.terms))


@dataclass(frozen=True)
class SeriesSpec:
    """Well-spaced series ``sum_k a_k * base((x - n_k) / b_k)``.

    ``n`` defaults to the tightest admissible spacing:
    ``n_1 = max(b_1, 9 (b_1 + b_2))`` and ``n_{k+1} = n_k + 9 (b_k + b_{k+1})``.
    """

    base: Node
    a: tuple[float, ...]
    b: tuple[float, ...]
    n: tuple[float, ...] | None = None

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        b = tuple(float(v) for v in self.b)
        if len(a) < 1:
            raise ValidationError("a", "series needs K >= 1 terms")
        if len(b) != len(a):
            raise ValidationError("b", f"length {len(b)} differs from len(a) = {len(a)}")
        for k, (ak, bk) in enumerate(zip(a, b), start=1):
            if not (ak > 0 and math.isfinite(ak)):
                raise ValidationError(f"a[{k}]", "must be finite and > 0")
            if not (bk > 0 and math.isfinite(bk)):
                raise ValidationError(f"b[{k}]", "must be finite and > 0")
        if self.n is None:
            n = [max(b[0], 9 * (b[0] + b[1])) if len(b) > 1 else b[0]]
            for k in range(len(b) - 1):
                n.append(n[-1] + 9 * (b[k] + b[k + 1]))
        else:
            n = [float(v) for v in self.n]
            if len(n) != len(a):
                raise ValidationError("n", f"length {len(n)} differs from len(a) = {len(a)}")
        slack = 1e-12
        if n[0] < b[0] * (1 - slack):
            raise ValidationError("n[1]", f"n_1 = {n[0]} < b_1 = {b[0]}")
        for k in range(len(n) - 1):
            need = 9 * (b[k] + b[k + 1])
            if n[k + 1] - n[k] < need - slack * max(abs(n[k]), abs(n[k + 1]), need):
                raise ValidationError(
                    f"n[{k + 1}]",
                    f"well-spacing fails at k={k + 1}: n_{k + 2} - n_{k + 1} = "
                    f"{n[k + 1] - n[k]} < 9(b_{k + 1} + b_{k + 2}) = {need}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "n", tuple(n))

    @property
    def K(self) -> int:
        return len(self.a)


def series_build(spec: SeriesSpec) -> Sum:
    """Expand a series into the sum of its transformed terms."""
    return Sum(tuple(spec.base.transformed(a, b, n) for a, b, n in zip(spec.a, spec.b, spec.n)))


@dataclass(frozen=True)
class Series(Node):
    spec: SeriesSpec
    kind = "series"

    @cached_property
    def expanded(self) -> Sum:
        return series_build(self.spec)

    def children(self):
        return (self.expanded,)

    def values(self, x):
        return self.expanded.values(x)

    def integrals(self, lo, hi, quad_tol=1e-10):
        return self.expanded.integrals(lo, hi, quad_tol)

    def transformed(self, a, b, x0):
        return self.expanded.transformed(a, b, x0)


# ---------------------------------------------------------------------------
# operations


def evaluate(f: Node, x: float) -> float:
    """Closed-form value of ``f`` at ``x``; singular points raise :class:`DomainError`."""
    x = float(x)
    if any(x == c for c in f.singular_points()):
        raise DomainError(f"x = {x} is a logarithmic singularity")
    return float(f.values(np.array([x]))[0])


def transform(f: Node, a: float, b: float, x0: float) -> Node:
    """Descriptor of ``x -> a * f((x - x0) / b)``."""
    if not (a > 0 and b > 0):
        raise ValidationError("a" if not a > 0 else "b", "transform needs a > 0 and b > 0")
    if a == 1 and b == 1 and x0 == 0:
        return f
    return f.transformed(float(a), float(b), float(x0))


def compile_step(f: Node, grid: GridSpec, domain: Interval | tuple[float, float]) -> StepFunction:
    """Cell-average step approximation of ``f`` on ``domain``.

    The mesh is the union of a uniform grid, every nonsmooth point of ``f``,
    geometric grading toward logarithmic singularities (and along logarithmic
    ramps), and the points where clamped terms reach their bounds.  Cell
    averages use closed-form antiderivatives, so indicators and affine pieces
    come out exact.
    """
    if not isinstance(domain, Interval):
        lo, hi = (float(v) for v in domain)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise DomainError("compile needs a finite domain; truncate to [-R, R] or [0, X] first")
        domain = Interval(lo, hi)
    a, b = domain.a, domain.b
    L = domain.length
    min_cell = grid.min_cell if grid.min_cell is not None else 1e-12 * L
    parts = [np.linspace(a, b, int(grid.base_cells) + 1)]
    parts.append(np.asarray(f.breaks(), dtype=float))
    parts.extend(f.mesh(a, b, grid.grading, min_cell))
    nodes = np.concatenate(parts)
    nodes = nodes[np.isfinite(nodes) & (nodes > a) & (nodes < b)]
    tol = DEDUP_RTOL * L
    nodes = _dedupe(np.concatenate([[a], nodes, [b]]), tol)
    cross = f.crossings(nodes)
    if cross:
        extra = np.concatenate(cross)
        extra = extra[(extra > a) & (extra < b)]
        nodes = _dedupe(np.concatenate([nodes, extra]), tol)
    lo, hi = nodes[:-1], nodes[1:]
    vals = f.integrals(lo, hi, grid.quad_tol) / (hi - lo)
    return StepFunction(nodes, vals).simplify()


# ---------------------------------------------------------------------------
# JSON


def _parse_bound(v, path):
    if isinstance(v, str):
        if v in ("inf", "+inf"):
            return math.inf
        if v == "-inf":
            return -math.inf
        raise ValidationError(path, f"expected a number or 'inf'/'-inf', got {v!r}")
    return _req_num(v, path)


def _req_num(v, path):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(path, f"expected a number, got {v!r}")
    return float(v)


def _req(d, key, path):
    if key not in d:
        raise ValidationError(f"{path}.{key}", "missing")
    return d[key]


def _interval(v, path):
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        raise ValidationError(path, "expected [a, b]")
    lo, hi = _req_num(v[0], f"{path}[0]"), _req_num(v[1], f"{path}[1]")
    try:
        return Interval(lo, hi)
    except DomainError as e:
        raise ValidationError(path, str(e)) from None


def _reraise(path):
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, et, ev, tb):
            if isinstance(ev, ValidationError) and not ev.field.startswith(path):
                raise ValidationError(f"{path}.{ev.field}", ev.message) from None
            return False
    return _Ctx()


def node_from_json(d, path: str = "node") -> Node:
    """Parse one descriptor node; errors name the offending field path."""
    if not isinstance(d, dict):
        raise ValidationError(path, "expected an object")
    kind = _req(d, "kind", path)
    num = lambda key: _req_num(_req(d, key, path), f"{path}.{key}")  # noqa: E731
    with _reraise(path):
        if kind == "constant":
            return Constant(num("c"))
        if kind == "affine":
            return Affine(num("slope"), num("intercept"),
                          _interval(_req(d, "support", path), f"{path}.support"))
        if kind == "logpow":
            return LogPowBump(num("a"), num("b"), num("x0"),
                              _req_num(d.get("p", 1.0), f"{path}.p"))
        if kind == "logramp":
            return LogRamp(num("a"), num("b"), num("x0"))
        if kind == "cosine":
            sup = d.get("support")
            return Cosine(num("amp"), num("freq"), _req_num(d.get("phase", 0.0), f"{path}.phase"),
                          _req_num(d.get("offset", 0.0), f"{path}.offset"),
                          None if sup is None else _interval(sup, f"{path}.support"))
        if kind == "indicator":
            return Indicator(_interval(_req(d, "support", path), f"{path}.support"))
        if kind == "clamp":
            return Clamp(node_from_json(_req(d, "inner", path), f"{path}.inner"),
                         _parse_bound(d.get("lo", "-inf"), f"{path}.lo"),
                         _parse_bound(d.get("hi", "inf"), f"{path}.hi"))
        if kind == "sum":
            terms = _req(d, "terms", path)
            if not isinstance(terms, list):
                raise ValidationError(f"{path}.terms", "expected a list")
            return Sum(tuple(node_from_json(t, f"{path}.terms[{i}]") for i, t in enumerate(terms)))
        if kind == "series":
            base = node_from_json(_req(d, "base", path), f"{path}.base")
            lists = {}
            for key in ("a", "b", "n"):
                v = d.get(key)
                if v is None:
                    if key == "n":
                        lists[key] = None
                        continue
                    raise ValidationError(f"{path}.{key}", "missing")
                if not isinstance(v, list):
                    raise ValidationError(f"{path}.{key}", "expected a list")
                lists[key] = [_req_num(x, f"{path}.{key}[{i}]") for i, x in enumerate(v)]
            K = d.get("K")
            if K is not None:
                if isinstance(K, bool) or not isinstance(K, int) or K < 1:
                    raise ValidationError(f"{path}.K", "expected a positive integer")
                for key, v in lists.items():
                    if v is not None:
                        if len(v) < K:
                            raise ValidationError(f"{path}.{key}", f"has fewer than K={K} entries")
                        lists[key] = v[:K]
            return Series(SeriesSpec(base, tuple(lists["a"]), tuple(lists["b"]),
                                     None if lists["n"] is None else tuple(lists["n"])))
    raise ValidationError(f"{path}.kind", f"unknown kind {kind!r}")


def _bound_json(v: float):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def node_to_json(f: Node) -> dict:
    if isinstance(f, Constant):
        return {"kind": "constant", "c": f.c}
    if isinstance(f, Affine):
        return {"kind": "affine", "slope": f.slope, "intercept": f.intercept,
                "support": [f.support_.a, f.support_.b]}
    if isinstance(f, LogPowBump):
        return {"kind": "logpow", "a": f.a, "b": f.b, "x0": f.x0, "p": f.p}
    if isinstance(f, LogRamp):
        return {"kind": "logramp", "a": f.a, "b": f.b, "x0": f.x0}
    if isinstance(f, Cosine):
        return {"kind": "cosine", "amp": f.amp, "freq": f.freq, "phase": f.phase,
                "offset": f.offset,
                "support": None if f.support_ is None else [f.support_.a, f.support_.b]}
    if isinstance(f, Indicator):
        return {"kind": "indicator", "support": [f.support_.a, f.support_.b]}
    if isinstance(f, Clamp):
        return {"kind": "clamp", "inner": node_to_json(f.inner),
                "lo": _bound_json(f.lo), "hi": _bound_json(f.hi)}
    if isinstance(f, Sum):
        return {"kind": "sum", "terms": [node_to_json(t) for t in f.terms]}
    if isinstance(f, Series):
        s = f.spec
        return {"kind": "series", "base": node_to_json(s.base), "a": list(s.a),
                "b": list(s.b), "n": list(s.n), "K": s.K}
    raise TypeError(f"cannot serialise {type(f).__name__}")


def load_descriptor(obj: dict) -> tuple[Node, Interval]:
    """Parse ``{"domain": [x0, x1], "node": {...}}``."""
    if not isinstance(obj, dict):
        raise ValidationError("descriptor", "expected an object")
    dom = _interval(_req(obj, "domain", "descriptor"), "domain")
    return node_from_json(_req(obj, "node", "descriptor"), "node"), dom


def dump_descriptor(f: Node, domain: Interval) -> dict:
    return {"domain": [domain.a, domain.b], "node": node_to_json(f)}
