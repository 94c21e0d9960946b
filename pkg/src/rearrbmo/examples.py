"""The worked examples: series of bumps and sequences f_k whose rearrangements misbehave.

:func:`make_example` returns descriptors together with any closed-form
distribution function or rearrangement that is known for them.
:func:`converge_experiment` runs a sequence example for ``k = 1..kmax`` and
records the seminorm and L¹ distances between ``f_k*`` and ``f*``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import ValidationError
from .funcspace import (Clamp, Constant, Cosine, GridSpec, Indicator, Interval, LogPowBump, LogRamp,
                        Node, Series, SeriesSpec, StepFunction, Sum, compile_step, transform)
from .rearrange import (RearrangementResult, decreasing_rearrangement, rearrange_series,
                        rearrange_truncated)
from .seminorm import bmo_distance, bmo_seminorm

__all__ = ["ExampleId", "Example", "ExperimentRow", "EXAMPLE_NAMES", "make_example",
           "converge_experiment", "rearrange_example", "rows_to_csv", "normalize_name"]

EXAMPLE_NAMES = ("series_a", "series_b", "series_c", "ex_discont", "ex_nocont", "ex_local",
                 "ex_inf", "logbump_p")
SEQUENCES = ("ex_discont", "ex_nocont", "ex_local", "ex_inf", "logbump_p")
EX_NOCONT_KMAX = 12
EX_LOCAL_KMAX = 6
CELLS_PER_PERIOD = 64


def normalize_name(name: str) -> str:
    return name.strip().replace("-", "_")


@dataclass(frozen=True)
class ExampleId:
    """An example name plus its parameters.

    ``k`` selects the sequence member, ``p`` the bump power for
    ``logbump_p``, ``K`` the number of retained series terms and ``X`` the
    half-line truncation length.
    """

    name: str
    k: int | None = None
    p: float | None = None
    K: int | None = None
    X: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "name", normalize_name(self.name))
        if self.name not in EXAMPLE_NAMES:
            raise ValidationError("name", f"unknown example {self.name!r}; expected one of "
                                          f"{', '.join(EXAMPLE_NAMES)}")
        if self.k is not None and (isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1):
            raise ValidationError("k", "must be an integer >= 1")
        if self.p is not None and not 0 < self.p <= 1:
            raise ValidationError("p", "must lie in (0, 1]")
        if self.K is not None and (int(self.K) != self.K or self.K < 1):
            raise ValidationError("K", "must be an integer >= 1")
        if self.X is not None and not self.X > 0:
            raise ValidationError("X", "must be > 0")
        if self.name == "ex_nocont" and self.k is not None and self.k > EX_NOCONT_KMAX:
            raise ValidationError("k", f"ex_nocont is capped at k <= {EX_NOCONT_KMAX}")
        if self.name == "ex_local" and self.k is not None and self.k > EX_LOCAL_KMAX:
            raise ValidationError("k", f"ex_local is capped at k <= {EX_LOCAL_KMAX}")


@dataclass(frozen=True)
class Example:
    """Descriptors, domain and closed forms of one example.

    ``half_line`` marks functions on ``(0, inf)`` that are computed on the
    truncation ``(0, X)`` stored in ``domain``.  ``window`` is the L¹ window
    for convergence rows.  ``limit_inf`` is ``inf f*`` when known.
    """

    id: ExampleId
    f: Node
    domain: Interval | None
    f_k: Node | None = None
    oracle_mu: Callable | None = None
    oracle_fstar: Callable | None = None
    oracle_mu_k: Callable | None = None
    oracle_fstar_k: Callable | None = None
    half_line: bool = False
    window: float | None = None
    spec: SeriesSpec | None = None
    tail_spec: SeriesSpec | None = None
    limit_inf: float | None = None


LOG_BUMP = LogPowBump(1.0, 1.0, 0.0, 1.0)


def _series(a, b, base=LOG_BUMP) -> SeriesSpec:
    return SeriesSpec(base, tuple(a), tuple(b))


def _series_example(ex: ExampleId) -> Example:
    tail_K = 256
    if ex.name == "series_a":
        K = ex.K or 12
        ak = lambda k: 1.0  # noqa: E731
        bk = lambda k: math.exp(-k)  # noqa: E731
        bsum = 1.0 / (math.e - 1.0)
        mu = lambda al: 2 * bsum * np.exp(-np.asarray(al, dtype=float))  # noqa: E731
        fstar = lambda s: np.maximum(np.log(2 * bsum / np.asarray(s, dtype=float)), 0.0)  # noqa: E731
        limit = 0.0
    elif ex.name == "series_b":
        K = ex.K or tail_K
        ak = lambda k: k ** -0.5  # noqa: E731
        bk = lambda k: math.exp(k)  # noqa: E731
        mu = lambda al: np.full(np.shape(al), np.inf)  # noqa: E731
        fstar = lambda s: np.full(np.shape(s), np.inf)  # noqa: E731
        limit = math.inf
    else:
        K = ex.K or 12
        ak = lambda k: 1.0 / k  # noqa: E731
        bk = lambda k: math.exp(k)  # noqa: E731

        def mu(al):
            al = np.asarray(al, dtype=float)
            with np.errstate(divide="ignore"):
                return np.where(al > 1, 2.0 / np.expm1(np.maximum(al - 1, 1e-300)), np.inf)

        fstar = lambda s: 1.0 + np.log1p(2.0 / np.asarray(s, dtype=float))  # noqa: E731
        limit = 1.0
    spec = _series([ak(k) for k in range(1, K + 1)], [bk(k) for k in range(1, K + 1)])
    # a long prefix feeds the tail test; shrinking b_k cannot be spaced in binary64, and
    # summable b_k leave every positive level finite anyway
    tail = spec
    if ex.name != "series_a":
        tail = _series([ak(k) for k in range(1, tail_K + 1)], [bk(k) for k in range(1, tail_K + 1)])
    f = Series(spec)
    domain = None
    if ex.name != "series_b":
        lo, hi = f.support()
        domain = Interval(min(lo, 0.0), hi)
    return Example(ex, f, domain, oracle_mu=mu, oracle_fstar=fstar, spec=spec, tail_spec=tail,
                   limit_inf=limit)


def _discont(ex: ExampleId) -> Example:
    p = 1.0 if ex.name == "ex_discont" else (ex.p if ex.p is not None else 0.5)
    f = Indicator(Interval(0.0, 1.0))
    g = LogPowBump(1.0, 0.5, 0.0, p)
    mu = lambda al: np.where(np.asarray(al, dtype=float) < 1, 1.0, 0.0)  # noqa: E731
    fstar = lambda s: np.where(np.asarray(s, dtype=float) < 1, 1.0, 0.0)  # noqa: E731
    out = dict(oracle_mu=mu, oracle_fstar=fstar, window=2.0, limit_inf=0.0)
    if ex.k is not None:
        k = ex.k
        gk = transform(g, 1.0 / k, 1.0, -0.5)
        out["f_k"] = Sum((f, gk))

        def mu_k(al):
            al = np.asarray(al, dtype=float)
            tail = np.exp(-(np.maximum(al, 0) * k) ** (1 / p))
            return np.where(al < 1, 1.0 + tail, tail)

        def fstar_k(s):
            s = np.asarray(s, dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                head = (-np.log(s)) ** p / k
                back = np.maximum(-np.log(np.maximum(s - 1, 1e-300)), 0.0) ** p / k
            cut = math.exp(-(k ** (1 / p)))
            return np.where(s < cut, head, np.where(s < 1 + cut, 1.0, back))

        out["oracle_mu_k"], out["oracle_fstar_k"] = mu_k, fstar_k
    return Example(ex, f, Interval(-1.0, 1.0), **out)


def _nocont(ex: ExampleId) -> Example:
    f = LogPowBump(1.0, 2.0, -6.0, 0.5)
    mu = lambda al: 4 * np.exp(-np.asarray(al, dtype=float) ** 2)  # noqa: E731
    fstar = lambda s: np.sqrt(np.maximum(np.log(4 / np.asarray(s, dtype=float)), 0.0))  # noqa: E731
    if ex.k is None:
        return Example(ex, f, Interval(-8.0, -2.0), oracle_mu=mu, oracle_fstar=fstar, limit_inf=0.0)
    k = ex.k
    bk = math.exp(k)
    nk = bk + k + 1
    gk = transform(LogPowBump(1.0, 1.0, 0.0, 0.5), k ** -0.5, bk, nk)
    dom = Interval(-8.0, nk + bk + 1)

    def mu_k(al):
        al = np.asarray(al, dtype=float)
        return 4 * np.exp(-al ** 2) + 2 * np.exp(k * (1 - al ** 2))

    def fstar_k(s):
        # invert the strictly decreasing mu_k by bisection
        s = np.atleast_1d(np.asarray(s, dtype=float))
        lo, hi = np.zeros_like(s), np.full_like(s, 10.0)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            big = mu_k(mid) > s
            lo, hi = np.where(big, mid, lo), np.where(big, hi, mid)
        return np.where(s < mu_k(0.0), 0.5 * (lo + hi), 0.0)

    return Example(ex, f, dom, f_k=Sum((f, gk)), oracle_mu=mu, oracle_fstar=fstar,
                   oracle_mu_k=mu_k, oracle_fstar_k=fstar_k, window=dom.length, limit_inf=0.0)


def _capped_ramp(k: int, nk: float) -> Node:
    # -min{(1/k) (ln(x - n_k))_+, 1}
    return Clamp(LogRamp(-1.0 / k, 1.0, nk), -1.0, math.inf)


def _halfline(ex: ExampleId) -> Example:
    k = ex.k or 1
    if ex.name == "ex_local":
        f = Cosine(0.5, math.pi / 2, 0.0, 1.5)
        nk = 4.0 * math.ceil(k * math.exp(k) / 4.0)
        limit = 2.0
    else:
        f = Constant(2.0)
        nk = float(k)
        limit = 2.0
    X = ex.X or 8 * (nk + math.exp(k))
    fk = Sum((f, _capped_ramp(k, nk))) if ex.k is not None else None
    fstar = lambda s: np.full(np.shape(s), 2.0)  # noqa: E731
    return Example(ex, f, Interval(0.0, X), f_k=fk, oracle_fstar=fstar, half_line=True,
                   window=nk + math.exp(k), limit_inf=limit)


def make_example(ex: ExampleId | str, **params) -> Example:
    """Build the named example; ``params`` are forwarded to :class:`ExampleId`."""
    if isinstance(ex, str):
        ex = ExampleId(ex, **params)
    if ex.name.startswith("series_"):
        return _series_example(ex)
    if ex.name in ("ex_discont", "logbump_p"):
        return _discont(ex)
    if ex.name == "ex_nocont":
        return _nocont(ex)
    return _halfline(ex)


# ---------------------------------------------------------------------------
# convergence experiments


@dataclass(frozen=True)
class ExperimentRow:
    k: int
    d_in: float
    d_out: float
    l1_out: float
    ess_inf_k: float
    residual: float
    stable: bool = True

    HEADER = "k,d_in,d_out,l1_out,ess_inf_k,residual,stable"

    def to_csv(self) -> str:
        return (f"{self.k},{self.d_in!r},{self.d_out!r},{self.l1_out!r},{self.ess_inf_k!r},"
                f"{self.residual!r},{str(self.stable).lower()}")


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    buf.write(ExperimentRow.HEADER + "\n")
    for r in rows:
        buf.write(r.to_csv() + "\n")
    return buf.getvalue()


def _grid_for(example: Example, grid: GridSpec) -> GridSpec:
    if example.id.name == "ex_local" and example.domain is not None:
        need = int(math.ceil(example.domain.length / 4.0 * CELLS_PER_PERIOD))
        if need > grid.base_cells:
            return replace(grid, base_cells=need)
    return grid


def rearrange_example(example: Example, node: Node, grid: GridSpec) -> RearrangementResult:
    """Rearrange ``node`` the way its example's domain requires."""
    grid = _grid_for(example, grid)
    if example.spec is not None and node is example.f:
        return rearrange_series(example.spec, grid, example.tail_spec)
    if example.half_line:
        return rearrange_truncated(node, grid, example.domain.length, example.domain.a)
    return decreasing_rearrangement(compile_step(node, grid, example.domain))


def _common(a: StepFunction, b: StepFunction, top: float | None = None):
    t = min(a.breakpoints[-1], b.breakpoints[-1])
    if top is not None:
        t = min(t, top)
    I = Interval(0.0, t)
    return a.restrict(I), b.restrict(I)


def converge_experiment(ex: ExampleId | str, kmax: int, b: float | None = None,
                        grid: GridSpec | None = None, tol: float = 1e-3, **params) -> list[ExperimentRow]:
    """One row per ``k = 1..kmax`` comparing ``f_k`` with ``f`` before and after rearranging."""
    if isinstance(ex, str):
        ex = ExampleId(ex, **params)
    if ex.name not in SEQUENCES:
        raise ValidationError("name", f"{ex.name} is not a sequence example")
    if int(kmax) != kmax or kmax < 1:
        raise ValidationError("kmax", "must be an integer >= 1")
    grid = grid or GridSpec()
    rows = []
    base_r = None
    for k in range(1, int(kmax) + 1):
        e = make_example(replace(ex, k=k))
        g = _grid_for(e, grid)
        sk = compile_step(e.f_k, g, e.domain)
        s = compile_step(e.f, g, e.domain)
        d_in = bmo_distance(sk, s, tol).value
        rk = rearrange_example(e, e.f_k, grid)
        if base_r is None or ex.name not in ("ex_discont", "logbump_p"):
            base_r = rearrange_example(e, e.f, grid)
        r = base_r
        window = b if b is not None else e.window
        fk_s, f_s = _common(rk.fstar, r.fstar)
        d_out = bmo_distance(fk_s, f_s, tol).value
        wa, wb = _common(rk.fstar, r.fstar, window)
        l1 = wa.l1_distance(wb)
        L = e.limit_inf if e.limit_inf is not None else r.ess_inf
        resid = bmo_seminorm((L - rk.fstar).positive_part().simplify(), tol=tol).value
        rows.append(ExperimentRow(k, float(d_in), float(d_out), float(l1), float(rk.ess_inf),
                                  float(resid), bool(rk.truncation_stable and r.truncation_stable)))
    return rows
