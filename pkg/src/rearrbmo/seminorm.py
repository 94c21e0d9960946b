"""Suprema of mean oscillation over intervals.

:class:`OscillationEngine` evaluates ``O(f, S)`` for large batches of
intervals.  It keeps a merge-sort tree over the cells: at level ``L`` every
block of ``2**L`` consecutive cells is sorted by value and carries suffix
sums of length and length*value.  An interval splits into two partial end
cells plus ``O(log m)`` whole blocks, and the positive-part identity
``O = (2/|S|) ∫_S (f - f_S)_+`` needs only "sum over cells with value above
f_S" per block, which is one binary search.

:func:`bmo_seminorm` maximises over a candidate family (breakpoint pairs, a
uniform endpoint grid, a multi-scale ladder around jumps and extrema) and
then polishes the best candidates by coordinate-wise golden-section search.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError
from .funcspace import Interval, StepFunction
from .oscillation import DEGENERATE_RTOL, BasisSpec, mean_oscillation
from .rearrange import RearrangementResult

__all__ = [
    "SupResult", "ModulusCurve", "OscillationEngine", "bmo_seminorm", "vmo_modulus",
    "bmo_distance", "jump_gap_bound_check", "polya_uniform_check", "sdr_transfer_check",
    "sdr_step",
]

GOLDEN = (math.sqrt(5) - 1) / 2
REFINE_TOP = 16
REFINE_ITERS = 48
REFINE_SWEEPS = 2
BATCH = 8192


@dataclass(frozen=True)
class SupResult:
    """Best probed interval for a supremum of mean oscillation."""

    value: float
    witness: Interval
    tol: float
    evaluations: int

    def to_dict(self) -> dict:
        return {"value": float(self.value), "witness": [self.witness.a, self.witness.b],
                "tol": float(self.tol), "evaluations": int(self.evaluations)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"


@dataclass(frozen=True)
class ModulusCurve:
    """``omega(delta) = sup_{|S| <= delta} O(f, S)`` on a decreasing list of deltas."""

    deltas: tuple[float, ...]
    omegas: tuple[float, ...]
    near_origin: bool = False
    witnesses: tuple[Interval, ...] = field(default=(), compare=False)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("delta,omega\n")
        for d, w in zip(self.deltas, self.omegas):
            out.write(f"{float(d)!r},{float(w)!r}\n")
        return out.getvalue()


class OscillationEngine:
    """Batched exact mean oscillation of one step function."""

    def __init__(self, s: StepFunction):
        self.s = s
        x, v, ell = s.breakpoints, s.values, s.lengths
        m = v.size
        npad = 1 << max(int(math.ceil(math.log2(m))), 0) if m > 1 else 1
        self.m, self.npad = m, npad
        self.x, self.v = x, v
        # global value ranks; padding cells get ranks past every real cell
        rank = np.empty(npad, dtype=np.int64)
        rank[:m] = np.argsort(np.argsort(v, kind="stable"), kind="stable")
        rank[m:] = np.arange(m, npad)
        self.sorted_v = np.sort(v, kind="stable")
        ell_p = np.zeros(npad)
        ell_p[:m] = ell
        lv_p = np.zeros(npad)
        lv_p[:m] = ell * v
        self.levels = []
        idx = np.arange(npad, dtype=np.int64)
        L = 0
        while (1 << L) <= npad:
            key = (idx >> L) * npad + rank
            order = np.argsort(key, kind="stable")
            ks = key[order]
            B = 1 << L
            nb = npad // B
            sl = ell_p[order].reshape(nb, B)[:, ::-1].cumsum(axis=1)[:, ::-1].ravel()
            slv = lv_p[order].reshape(nb, B)[:, ::-1].cumsum(axis=1)[:, ::-1].ravel()
            self.levels.append((ks, sl, slv))
            L += 1

    def _decompose(self, lo, hi):
        """Yield ``(level, query_index, block)`` triples covering cells ``[lo, hi)``."""
        l, r = lo.copy(), hi.copy()
        qi = np.arange(lo.size)
        for L in range(len(self.levels)):
            live = l < r
            if not live.any():
                break
            take_l = live & (l & 1 == 1)
            if take_l.any():
                yield L, qi[take_l], l[take_l]
                l = l + take_l
            live = l < r
            take_r = live & (r & 1 == 1)
            if take_r.any():
                r = r - take_r
                yield L, qi[take_r], r[take_r]
            l >>= 1
            r >>= 1

    def __call__(self, a, b) -> np.ndarray:
        a = np.atleast_1d(np.asarray(a, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        out = np.empty(a.size)
        for k in range(0, a.size, BATCH):
            out[k:k + BATCH] = self._batch(a[k:k + BATCH], b[k:k + BATCH])
        return out

    def _batch(self, a, b):
        x, v, m, npad = self.x, self.v, self.m, self.npad
        ia = np.clip(np.searchsorted(x, a, side="right") - 1, 0, m - 1)
        ib = np.clip(np.searchsorted(x, b, side="left") - 1, 0, m - 1)
        one = ia >= ib
        la = np.where(one, b - a, x[ia + 1] - a)
        lb = np.where(one, 0.0, b - x[ib])
        va, vb = v[ia], v[ib]
        lo = np.where(one, 0, ia + 1)
        hi = np.where(one, 0, ib)
        W = la + lb
        P = la * va + lb * vb
        for L, q, blk in self._decompose(lo, hi):
            ks, sl, slv = self.levels[L]
            start = blk << L
            W[q] += sl[start]
            P[q] += slv[start]
        width = b - a
        mu = P / W
        t = np.searchsorted(self.sorted_v, mu, side="right")
        A = la * np.maximum(va - mu, 0.0) + lb * np.maximum(vb - mu, 0.0)
        for L, q, blk in self._decompose(lo, hi):
            ks, sl, slv = self.levels[L]
            start, end = blk << L, (blk + 1) << L
            pos = np.searchsorted(ks, blk * npad + t[q], side="left")
            pos = np.clip(pos, start, end)
            inside = pos < end
            pc = np.minimum(pos, npad - 1)
            Wp = np.where(inside, sl[pc], 0.0)
            Pp = np.where(inside, slv[pc], 0.0)
            A[q] += Pp - mu[q] * Wp
        return np.where(one, 0.0, 2.0 * np.maximum(A, 0.0) / width)


# ---------------------------------------------------------------------------
# candidate families


def _pairs(p: np.ndarray, dmax: float, min_len: float):
    i, j = np.triu_indices(p.size, k=1)
    a, b = p[i], p[j]
    keep = (b - a <= dmax) & (b - a >= min_len)
    return a[keep], b[keep]


def _subsample(p: np.ndarray, n: int) -> np.ndarray:
    if p.size <= n:
        return p
    return p[np.unique(np.linspace(0, p.size - 1, n).round().astype(int))]


def _candidates(s: StepFunction, W: Interval, dmax: float, min_len: float, grid_points: int):
    x, v = s.breakpoints, s.values
    inner = x[(x > W.a) & (x < W.b)]
    bp = np.concatenate([[W.a], inner, [W.b]])
    # cells and jumps in the window, for the ladder centres
    ci = np.clip(np.searchsorted(x, 0.5 * (bp[:-1] + bp[1:]), side="right") - 1, 0, s.m - 1)
    cv = v[ci]
    jumps = np.abs(np.diff(cv))
    cand_a, cand_b = [], []

    # (i) breakpoint pairs: all of them when few, else the largest jumps plus a spread
    if bp.size <= 512:
        sel = bp
    else:
        top = bp[1:-1][np.argsort(-jumps, kind="stable")[:128]]
        sel = np.unique(np.concatenate([[W.a, W.b], top, _subsample(bp, 384)]))
    a, b = _pairs(sel, dmax, min_len)
    cand_a.append(a)
    cand_b.append(b)
    # short hops between neighbouring breakpoints, for small-scale constraints
    nb = _subsample(bp, 4096)
    for k in range(1, 5):
        a, b = nb[:-k], nb[k:]
        keep = (b - a <= dmax) & (b - a >= min_len)
        cand_a.append(a[keep])
        cand_b.append(b[keep])

    # (ii) uniform endpoint grid
    g = np.linspace(W.a, W.b, grid_points)
    a, b = _pairs(g, dmax, min_len)
    cand_a.append(a)
    cand_b.append(b)

    # (iii) multi-scale ladder around window ends, big jumps and extreme cells
    centres = [W.a, W.b]
    if jumps.size:
        centres.extend(bp[1:-1][np.argsort(-jumps, kind="stable")[:64]])
    mids = 0.5 * (bp[:-1] + bp[1:])
    order = np.argsort(cv, kind="stable")
    centres.extend(mids[order[-16:]])
    centres.extend(mids[order[:16]])
    centres = np.unique(np.asarray(centres))
    top = min(dmax, W.length)
    bottom = max(min_len, 1e-7 * W.length)
    n_sc = max(int(math.floor(math.log(top / bottom) / math.log(math.sqrt(2)))) + 1, 1)
    scales = top * math.sqrt(2) ** -np.arange(n_sc)
    theta = np.linspace(0.0, 1.0, 9)
    C, H, T = np.meshgrid(centres, scales, theta, indexing="ij")
    a = (C - T * H).ravel()
    b = a + H.ravel()
    # shift into the window, keeping the length
    shift = np.maximum(W.a - a, 0.0) - np.maximum(b - W.b, 0.0)
    a, b = np.maximum(a + shift, W.a), np.minimum(b + shift, W.b)
    keep = b - a >= min_len
    cand_a.append(a[keep])
    cand_b.append(b[keep])
    return np.concatenate(cand_a), np.concatenate(cand_b)


def _golden_coordinate(engine, a, b, which, dmax, min_len, W, tol):
    """Maximise over one endpoint per candidate; returns new endpoints and all probes."""
    h = b - a
    if which == 0:
        lo = np.maximum(np.maximum(a - 0.5 * h, W.a), b - dmax)
        hi = np.minimum(a + 0.5 * h, b - min_len)
    else:
        lo = np.maximum(b - 0.5 * h, a + min_len)
        hi = np.minimum(np.minimum(b + 0.5 * h, W.b), a + dmax)
    hi = np.maximum(hi, lo)
    probes_a, probes_b, probes_v = [], [], []

    def ev(t):
        aa, bb = (t, b) if which == 0 else (a, t)
        val = engine(aa, bb)
        probes_a.append(aa)
        probes_b.append(bb)
        probes_v.append(val)
        return val

    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = ev(x1), ev(x2)
    stop = tol * np.maximum(h, min_len) / 64
    for _ in range(REFINE_ITERS):
        active = hi - lo > stop
        if not active.any():
            break
        left = f1 >= f2
        # keep the bracket holding the larger interior value
        new_lo = np.where(left, lo, x1)
        new_hi = np.where(left, x2, hi)
        lo = np.where(active, new_lo, lo)
        hi = np.where(active, new_hi, hi)
        nx1 = np.where(left, hi - GOLDEN * (hi - lo), x2)
        nx2 = np.where(left, x1, lo + GOLDEN * (hi - lo))
        x1 = np.where(active, nx1, x1)
        x2 = np.where(active, nx2, x2)
        f1, f2 = ev(x1), ev(x2)
    return np.concatenate(probes_a), np.concatenate(probes_b), np.concatenate(probes_v)


def bmo_seminorm(s: StepFunction, constraint: BasisSpec | None = None, tol: float = 1e-3,
                 grid_points: int = 257, extra: list[Interval] | None = None,
                 engine: OscillationEngine | None = None) -> SupResult:
    """Largest mean oscillation over the probed intervals admitted by ``constraint``.

    ``extra`` adds caller-supplied candidate intervals.  The value is the
    reference oscillation at the witness, which is the lexicographically
    smallest probe within ``1e-12`` relative of the best.
    """
    if not tol > 0:
        raise ValidationError("tol", "must be > 0")
    constraint = constraint or BasisSpec()
    D = s.domain
    W = D if constraint.window is None else constraint.window.intersect(D)
    if W is None:
        raise DomainError("constraint window does not meet the domain")
    dmax = constraint.max_measure if constraint.max_measure is not None else math.inf
    min_len = 2 * DEGENERATE_RTOL * D.length
    if min(dmax, W.length) < min_len:
        raise DomainError("admissible intervals are shorter than the degeneracy threshold")
    engine = engine or OscillationEngine(s)
    a, b = _candidates(s, W, dmax, min_len, grid_points)
    if extra:
        ea = np.array([I.a for I in extra])
        eb = np.array([I.b for I in extra])
        ok = (ea >= W.a) & (eb <= W.b) & (eb - ea <= dmax) & (eb - ea >= min_len)
        a, b = np.concatenate([a, ea[ok]]), np.concatenate([b, eb[ok]])
    vals = engine(a, b)
    all_a, all_b, all_v = [a], [b], [vals]

    # polish the best distinct candidates
    order = np.lexsort((b, a, -vals))
    picked, seen = [], set()
    for i in order:
        key = (round(a[i] / (1e-6 * W.length)), round(b[i] / (1e-6 * W.length)))
        if key in seen:
            continue
        seen.add(key)
        picked.append(i)
        if len(picked) == REFINE_TOP:
            break
    ra, rb = a[picked].copy(), b[picked].copy()
    best = vals[picked].copy()
    for _ in range(REFINE_SWEEPS):
        for which in (0, 1):
            pa, pb, pv = _golden_coordinate(engine, ra, rb, which, dmax, min_len, W, tol)
            all_a.append(pa)
            all_b.append(pb)
            all_v.append(pv)
            n = ra.size
            pv2 = pv.reshape(-1, n)
            k = pv2.argmax(axis=0)
            cand = pv2[k, np.arange(n)]
            better = cand > best
            ra = np.where(better, pa.reshape(-1, n)[k, np.arange(n)], ra)
            rb = np.where(better, pb.reshape(-1, n)[k, np.arange(n)], rb)
            best = np.maximum(best, cand)

    A, B, V = np.concatenate(all_a), np.concatenate(all_b), np.concatenate(all_v)
    top = V.max()
    near = np.flatnonzero(V >= top - 1e-12 * max(abs(top), 1e-300))
    j = near[np.lexsort((B[near], A[near]))[0]]
    wit = Interval(A[j], B[j])
    return SupResult(mean_oscillation(s, wit), wit, float(tol), int(V.size))


def vmo_modulus(s: StepFunction, deltas, near_origin: bool = False, tol: float = 1e-3) -> ModulusCurve:
    """``omega(delta)`` for each delta, optionally restricted to ``S ⊆ (0, delta)``.

    The near-origin window is intersected with the domain, so the origin
    must lie in ``[a, b)``.
    """
    ds = [float(d) for d in deltas]
    if not ds or any(not d > 0 for d in ds):
        raise ValidationError("delta", "deltas must be positive")
    if any(ds[i + 1] >= ds[i] for i in range(len(ds) - 1)):
        raise ValidationError("delta", "deltas must be strictly decreasing")
    D = s.domain
    if near_origin and not D.a <= 0.0 < D.b:
        raise DomainError("near-origin shapes need 0 in [a, b) of the domain")
    engine = OscillationEngine(s)
    omegas, wits = [], []
    for d in ds:
        window = Interval(max(D.a, 0.0), min(d, D.b)) if near_origin else None
        r = bmo_seminorm(s, BasisSpec(max_measure=d, window=window), tol, engine=engine)
        omegas.append(r.value)
        wits.append(r.witness)
    # a witness for a smaller delta is admissible for every larger one
    for i in range(len(ds) - 2, -1, -1):
        if omegas[i + 1] > omegas[i]:
            omegas[i], wits[i] = omegas[i + 1], wits[i + 1]
    return ModulusCurve(tuple(ds), tuple(omegas), bool(near_origin), tuple(wits))


def bmo_distance(s1: StepFunction, s2: StepFunction, tol: float = 1e-3,
                 constraint: BasisSpec | None = None) -> SupResult:
    """Seminorm of the cellwise difference on the merged breakpoints."""
    return bmo_seminorm((s1 - s2).simplify(), constraint, tol)


def jump_gap_bound_check(r: RearrangementResult, curve: ModulusCurve, q: float = 0.25,
                         tol: float = 1e-3) -> dict:
    """Compare the largest jump of ``f*`` with ``(2q)^-1 min_delta omega(delta)``."""
    if not 0 < q <= 0.25:
        raise ValidationError("q", "must lie in (0, 1/4]")
    bound = min(curve.omegas) / (2 * q)
    return {"gap": float(r.jump_gap), "bound": float(bound),
            "bound_ok": bool(r.jump_gap <= bound + tol)}


def polya_uniform_check(seq, limit: StepFunction, K: Interval, samples: int = 4096) -> list[float]:
    """Per-index ``sup_K |f_k* - limit|`` on a dense grid plus every breakpoint in ``K``."""
    fs = [r.fstar if isinstance(r, RearrangementResult) else r for r in seq]
    for f in fs + [limit]:
        D = f.domain
        if not (D.a < K.a and K.b < D.b):
            raise DomainError(f"K = ({K.a}, {K.b}) is not compactly inside ({D.a}, {D.b})")
    pts = [np.linspace(K.a, K.b, samples + 1)]
    for f in fs + [limit]:
        x = f.breakpoints
        pts.append(x[(x >= K.a) & (x <= K.b)])
    p = np.unique(np.concatenate(pts))
    p = np.unique(np.concatenate([p, 0.5 * (p[:-1] + p[1:])]))
    lim = limit(p)
    return [float(np.max(np.abs(f(p) - lim))) for f in fs]


def sdr_step(r: RearrangementResult, Q: Interval) -> StepFunction:
    """The one-dimensional profile ``x -> f*(2|x|)`` on ``Q`` as an exact step function."""
    s = r.fstar.breakpoints
    half = 0.5 * s[(s > 0) & (s < 2 * max(abs(Q.a), abs(Q.b)))]
    pts = np.concatenate([[Q.a, Q.b], half, -half, [0.0]])
    pts = np.unique(pts[(pts >= Q.a) & (pts <= Q.b)])
    mids = 0.5 * (pts[:-1] + pts[1:])
    return StepFunction(pts, r.fstar(2 * np.abs(mids)))


def sdr_transfer_check(r1: RearrangementResult, r2: RearrangementResult, R: float, Q: Interval,
                       tol: float = 1e-9, opt_tol: float = 1e-3) -> dict:
    """Check ``O(S f1 - S f2, Q) <= 2 O(f1* - f2*, I)`` for some ``I ⊂ (0, 2R)``, ``|I| <= 2d``.

    ``Q`` is an interval of diameter ``d`` centred at ``x`` with
    ``|x| <= R - d/2``.  The right-hand side is the best value over the
    seminorm search restricted to ``(0, 2R)`` with intervals of measure at
    most ``2d`` (a 513-point endpoint grid among the probes), plus the image
    of ``Q`` under ``x -> 2|x|``.
    """
    d, c = Q.length, Q.center
    if not R > 0:
        raise ValidationError("R", "must be > 0")
    if abs(c) > R - d / 2 + 1e-12 * R:
        raise ValidationError("Q", f"|centre| = {abs(c)} exceeds R - d/2 = {R - d / 2}")
    for r in (r1, r2):
        if r.fstar.breakpoints[-1] < 2 * R * (1 - 1e-12):
            raise DomainError(f"rearrangement domain is shorter than 2R = {2 * R}")
    lhs = mean_oscillation((sdr_step(r1, Q) - sdr_step(r2, Q)), Q)
    top = min(2 * R, r1.fstar.breakpoints[-1], r2.fstar.breakpoints[-1])
    band = Interval(0.0, top)
    diff = (r1.fstar.restrict(band) - r2.fstar.restrict(band)).simplify()
    lo = 0.0 if Q.a <= 0 <= Q.b else 2 * min(abs(Q.a), abs(Q.b))
    hi = 2 * max(abs(Q.a), abs(Q.b))
    folded = Interval(lo, min(hi, top))
    res = bmo_seminorm(diff, BasisSpec(max_measure=2 * d), opt_tol, grid_points=513, extra=[folded])
    rhs = 2 * res.value
    return {"lhs": float(lhs), "rhs_best": float(rhs), "ok": bool(lhs <= rhs + tol * max(1.0, lhs)),
            "witness": [res.witness.a, res.witness.b]}
