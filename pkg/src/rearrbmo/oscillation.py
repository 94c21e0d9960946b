"""Shapewise functionals of step functions on intervals.

Everything here is exact for step functions: each interval ``S`` cuts the
cells into weights ``|cell_i ∩ S|`` and the functionals are finite sums over
those weights.  No quadrature happens in this module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .funcspace import DEDUP_RTOL, Interval, StepFunction

__all__ = [
    "Interval", "BasisSpec", "cell_weights", "mean_on", "mean_oscillation",
    "positive_part_oscillation", "median_on", "mean_abs_deviation",
    "double_integral_oscillation", "indicator_oscillation",
]

DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True)
class BasisSpec:
    """Which intervals a supremum ranges over.

    ``max_measure`` caps ``|S|`` (the small-shape constraint of a VMO
    modulus); ``window``, when set, keeps every shape inside it.
    ``density_q`` is the density constant used by jump diagnostics.
    """

    kind: str = "intervals"
    max_measure: float | None = None
    density_q: float = 0.25
    window: Interval | None = None

    def __post_init__(self):
        if self.kind != "intervals":
            raise ValidationError("kind", f"only 'intervals' is supported, got {self.kind!r}")
        if self.max_measure is not None and not self.max_measure > 0:
            raise ValidationError("max_measure", "must be > 0")
        if not 0 < self.density_q <= 0.25:
            raise ValidationError("density_q", "must lie in (0, 1/4]")


def cell_weights(s: StepFunction, S: Interval) -> tuple[np.ndarray, np.ndarray]:
    """Values and overlap lengths of the cells of ``s`` meeting ``S``."""
    D = s.domain
    slack = DEDUP_RTOL * D.length
    if S.a < D.a - slack or S.b > D.b + slack:
        raise DomainError(f"({S.a}, {S.b}) is not inside ({D.a}, {D.b})")
    if S.length < DEGENERATE_RTOL * D.length:
        raise DomainError(f"|S| = {S.length} is below {DEGENERATE_RTOL} * |domain|")
    x = s.breakpoints
    a, b = max(S.a, D.a), min(S.b, D.b)
    i0 = int(np.searchsorted(x, a, side="right")) - 1
    i1 = int(np.searchsorted(x, b, side="left"))
    i0 = min(max(i0, 0), s.m - 1)
    i1 = max(min(i1, s.m), i0 + 1)
    lo = np.maximum(x[i0:i1], a)
    hi = np.minimum(x[i0 + 1:i1 + 1], b)
    return s.values[i0:i1], np.maximum(hi - lo, 0.0)


def mean_on(s: StepFunction, S: Interval) -> float:
    v, w = cell_weights(s, S)
    return float(v @ w / w.sum())


def mean_oscillation(s: StepFunction, S: Interval) -> float:
    """Average of ``|f - f_S|`` over ``S``."""
    v, w = cell_weights(s, S)
    W = w.sum()
    m = v @ w / W
    return float(np.abs(v - m) @ w / W)


def positive_part_oscillation(s: StepFunction, S: Interval) -> float:
    """The same quantity written as ``(2/|S|) ∫_S (f - f_S)_+``."""
    v, w = cell_weights(s, S)
    W = w.sum()
    m = v @ w / W
    return float(2.0 * (np.maximum(v - m, 0.0) @ w) / W)


def mean_abs_deviation(s: StepFunction, S: Interval, alpha: float) -> float:
    """Average of ``|f - alpha|`` over ``S``."""
    v, w = cell_weights(s, S)
    return float(np.abs(v - alpha) @ w / w.sum())


def median_on(s: StepFunction, S: Interval) -> float:
    """Lower median of ``f`` on ``S``.

    The smallest cell value ``m`` with ``|{f < m} ∩ S| <= |S|/2`` and
    ``|{f > m} ∩ S| <= |S|/2``.
    """
    v, w = cell_weights(s, S)
    order = np.argsort(v, kind="stable")
    vs, ws = v[order], w[order]
    uniq, start = np.unique(vs, return_index=True)
    wsum = np.add.reduceat(ws, start)
    W = wsum.sum()
    below = np.concatenate([[0.0], np.cumsum(wsum)[:-1]])
    above = W - below - wsum
    half = 0.5 * W * (1 + 1e-12)
    ok = np.flatnonzero((below <= half) & (above <= half))
    return float(uniq[ok[0]])


def double_integral_oscillation(s: StepFunction, S: Interval) -> float:
    """``(1/|S|^2) ∫_S ∫_S |f(x) - f(y)| dx dy`` via sorted prefix sums."""
    v, w = cell_weights(s, S)
    order = np.argsort(v, kind="stable")
    vs, ws = v[order], w[order]
    W_before = np.cumsum(ws) - ws
    P_before = np.cumsum(vs * ws) - vs * ws
    total = 2.0 * np.sum(ws * (vs * W_before - P_before))
    return float(total / ws.sum() ** 2)


def indicator_oscillation(rho: float) -> float:
    """Mean oscillation of an indicator on a shape it fills to fraction ``rho``."""
    if not 0.0 <= rho <= 1.0:
        raise ValidationError("rho", "must lie in [0, 1]")
    return 2.0 * rho * (1.0 - rho)
