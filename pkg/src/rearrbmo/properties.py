"""Seeded randomized property suites.

Each suite draws random step functions from a ``numpy`` generator and
counts violations of one identity or inequality per named check.  The
acceptance tests and the ``proptest`` command both run these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .funcspace import GridSpec, Indicator, Interval, LogPowBump, StepFunction, Sum, compile_step, transform
from .oscillation import (double_integral_oscillation, mean_abs_deviation, mean_on,
                          mean_oscillation, median_on, positive_part_oscillation)
from .rearrange import RearrangementResult, decreasing_rearrangement, distribution
from .seminorm import bmo_seminorm, jump_gap_bound_check, sdr_transfer_check, vmo_modulus

__all__ = ["CheckResult", "random_step", "rearrangement_suite", "oscillation_suite",
           "jump_bound_suite", "sdr_transfer_suite", "acceptance_corpus", "run_all"]

RTOL = 1e-9


@dataclass
class CheckResult:
    name: str
    trials: int = 0
    failures: int = 0
    worst: float = 0.0

    def record(self, ok: bool, excess: float = 0.0):
        self.trials += 1
        if not ok:
            self.failures += 1
            self.worst = max(self.worst, float(excess))

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.trials > 0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.failures}/{self.trials} failures"


def random_step(rng: np.random.Generator, max_cells: int = 64, length: float | None = None,
                lo: float = 0.0, nonneg: bool = False, levels: int | None = None) -> StepFunction:
    """Random step function with 1..max_cells cells on ``(lo, lo + length)``.

    ``levels`` draws values from that many distinct integers, which produces
    ties and repeated levels.
    """
    m = int(rng.integers(1, max_cells + 1))
    L = float(length) if length is not None else float(rng.uniform(0.5, 10.0))
    cuts = np.sort(rng.uniform(0, L, m - 1))
    x = np.unique(np.concatenate([[0.0], cuts, [L]])) + lo
    n = x.size - 1
    if levels:
        v = rng.integers(0, levels, n).astype(float)
    else:
        v = rng.normal(0.0, 2.0, n)
    if nonneg:
        v = np.abs(v)
    return StepFunction(x, v)


def _random_sub(rng, D: Interval, min_frac: float = 1e-3) -> Interval:
    while True:
        a, b = np.sort(rng.uniform(D.a, D.b, 2))
        if b - a > min_frac * D.length:
            return Interval(a, b)


def _close(x, y, rtol=RTOL, atol=1e-12):
    return abs(x - y) <= atol + rtol * max(abs(x), abs(y))


def _same_step(f: StepFunction, g: StepFunction, rtol=RTOL) -> tuple[bool, float]:
    if not _close(f.breakpoints[-1], g.breakpoints[-1]):
        return False, abs(f.breakpoints[-1] - g.breakpoints[-1])
    top = min(f.breakpoints[-1], g.breakpoints[-1])
    pts = np.unique(np.concatenate([f.breakpoints, g.breakpoints]))
    pts = pts[pts < top]
    mids = 0.5 * (pts[:-1] + pts[1:]) if pts.size > 1 else np.array([0.5 * top])
    # skip slivers created by rounding where the two layouts disagree by ~eps
    wide = np.diff(pts) > 1e-9 * top if pts.size > 1 else np.array([True])
    d = np.abs(f(mids[wide]) - g(mids[wide]))
    worst = float(d.max()) if d.size else 0.0
    scale = max(np.abs(f.values).max(), 1.0)
    return worst <= rtol * scale, worst


def rearrangement_suite(n: int = 200, seed: int = 0, max_cells: int = 64) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    R1, R2, R2p, R3, R4, SC, MONO = (CheckResult(k) for k in (
        "R1 equimeasurability", "R2 L1 non-expansive", "R2 Lp norms preserved",
        "R3 monotone chains", "R4 truncation commutes", "scaling law", "f* nonincreasing"))
    for _ in range(n):
        s = random_step(rng, max_cells, levels=int(rng.integers(2, 12)) if rng.random() < 0.3 else None)
        r = decreasing_rearrangement(s)
        v = r.fstar.values
        MONO.record(bool(np.all(np.diff(v) <= 0)))
        alphas = np.concatenate([rng.uniform(0, np.abs(s.values).max() * 1.1, 45),
                                 np.abs(s.values)[:5]])
        worst = max(abs(distribution(s, a) - distribution(r.fstar, a)) for a in alphas)
        R1.record(worst <= 1e-12 * s.domain.length, worst)

        # pair on a common breakpoint set
        t = StepFunction(s.breakpoints, rng.normal(0, 2, s.m))
        rt = decreasing_rearrangement(t)
        lhs = r.fstar.l1_distance(rt.fstar)
        rhs = s.l1_distance(t)
        R2.record(lhs <= rhs * (1 + RTOL) + 1e-12, lhs - rhs)
        ok = all(_close(r.fstar.lp_norm(p), s.lp_norm(p)) for p in (1, 2, math.inf))
        R2p.record(ok)

        # increasing nonnegative chain
        base = abs(s)
        chain = [base]
        for _ in range(4):
            chain.append(chain[-1] + StepFunction(s.breakpoints, np.abs(rng.normal(0, 1, s.m))))
        stars = [decreasing_rearrangement(c).fstar for c in chain]
        ss = rng.uniform(0, s.domain.length, 64)
        vals = np.array([st(ss) for st in stars])
        R3.record(bool(np.all(np.diff(vals, axis=0) >= -1e-12)))

        for _ in range(20 // 4):
            lo, hi = np.sort(rng.uniform(0, np.abs(s.values).max() + 0.5, 2))
            lhs_r = decreasing_rearrangement(abs(s).clamp(lo, hi)).fstar
            rhs_r = r.fstar.clamp(lo, hi)
            ok, worst = _same_step(lhs_r, rhs_r)
            R4.record(ok, worst)

        a, b = float(rng.uniform(0.2, 5)), float(rng.uniform(0.2, 5))
        scaled = StepFunction(s.breakpoints * b, s.values * a)
        rs = decreasing_rearrangement(scaled).fstar
        ss = rng.uniform(0, scaled.domain.length, 50)
        ok = np.allclose(rs(ss), a * r.fstar(ss / b), rtol=RTOL, atol=1e-12)
        SC.record(bool(ok))
    return [R1, R2, R2p, R3, R4, SC, MONO]


def oscillation_suite(n: int = 200, seed: int = 1, max_cells: int = 64,
                      seminorm_tol: float = 1e-3) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    names = ("O1 constant shift", "O2 positive-part form", "O3 |f| at most 2O", "O4 median bound",
             "O4 median minimizes", "O5 double-integral sandwich", "O6 truncation",
             "O7 subset ratio", "B2 L1 bound", "B4 support ratio")
    C = {k: CheckResult(k) for k in names}
    for _ in range(n):
        s = random_step(rng, max_cells)
        D = s.domain
        big = _random_sub(rng, D)
        S = _random_sub(rng, big)
        O = mean_oscillation(s, S)
        c = float(rng.normal(0, 10))
        C["O1 constant shift"].record(_close(mean_oscillation(s + c, S), O, atol=1e-10))
        C["O2 positive-part form"].record(_close(positive_part_oscillation(s, S), O, atol=1e-12))
        Oa = mean_oscillation(abs(s), S)
        C["O3 |f| at most 2O"].record(Oa <= 2 * O * (1 + RTOL) + 1e-12, Oa - 2 * O)
        med = median_on(s, S)
        dev = mean_abs_deviation(s, S, med)
        C["O4 median bound"].record(O <= 2 * dev * (1 + RTOL) + 1e-12, O - 2 * dev)
        alphas = np.concatenate([rng.uniform(s.values.min() - 1, s.values.max() + 1, 20),
                                 [mean_on(s, S)]])
        others = min(mean_abs_deviation(s, S, a) for a in alphas)
        C["O4 median minimizes"].record(dev <= others * (1 + RTOL) + 1e-12, dev - others)
        dbl = double_integral_oscillation(s, S)
        ok = O * (1 - RTOL) - 1e-12 <= dbl <= 2 * O * (1 + RTOL) + 1e-12
        C["O5 double-integral sandwich"].record(ok)
        lo, hi = np.sort(rng.normal(0, 2, 2))
        Ot = mean_oscillation(s.clamp(lo, hi), S)
        C["O6 truncation"].record(Ot <= O * (1 + RTOL) + 1e-12, Ot - O)
        Obig = mean_oscillation(s, big)
        bound = big.length / S.length * Obig
        C["O7 subset ratio"].record(O <= bound * (1 + RTOL) + 1e-12, O - bound)

        sup = bmo_seminorm(s, tol=seminorm_tol).value
        l1 = O * S.length
        C["B2 L1 bound"].record(l1 <= S.length * sup * (1 + RTOL) + 1e-12, l1 - S.length * sup)

        # nonnegative function supported in I inside a larger domain
        core = random_step(rng, max_cells, length=float(rng.uniform(0.5, 3)), nonneg=True)
        I = core.domain
        pad = float(rng.uniform(0.5, 5))
        x = np.concatenate([[I.a - pad], core.breakpoints, [I.b + pad]])
        v = np.concatenate([[0.0], core.values, [0.0]])
        h = StepFunction(x, v)
        semi = bmo_seminorm(h, tol=seminorm_tol).value
        for _ in range(3):
            S2 = _random_sub(rng, h.domain)
            ov = max(0.0, min(S2.b, I.b) - max(S2.a, I.a))
            if ov >= S2.length * (1 - 1e-12):
                continue
            val = mean_oscillation(h, S2)
            bnd = 4 * ov / S2.length * semi
            C["B4 support ratio"].record(val <= bnd * (1 + RTOL) + 1e-12, val - bnd)
    return list(C.values())


def _two_level(rng) -> StepFunction:
    hi, lo = sorted(rng.uniform(0, 5, 2), reverse=True)
    if hi - lo < 0.1:
        hi = lo + 0.1 + hi
    return StepFunction([0.0, 1.0, 2.0], [hi, lo])


def jump_bound_suite(n: int = 50, seed: int = 2, deltas=(1e-1, 1e-2, 1e-3, 1e-4)) -> list[CheckResult]:
    """Jump of ``f*`` against the small-scale oscillation of ``f``, on random steps with a gap."""
    rng = np.random.default_rng(seed)
    res = CheckResult("jump gap bound (q = 1/4)")
    done = 0
    while done < n:
        s = random_step(rng, 32, levels=6) if done % 2 else random_step(rng, 32)
        r = decreasing_rearrangement(s)
        if not r.jump_gap > 0:
            continue
        curve = vmo_modulus(s, deltas, tol=1e-3)
        chk = jump_gap_bound_check(r, curve, 0.25)
        res.record(chk["bound_ok"], chk["gap"] - chk["bound"])
        done += 1
    return [res]


def acceptance_corpus(grid: GridSpec | None = None) -> dict[str, RearrangementResult]:
    """Rearrangements on ``(0, 2)`` of the functions used across the acceptance checks."""
    grid = grid or GridSpec(base_cells=4096)
    dom = Interval(-1.0, 1.0)
    items = {
        "log bump": LogPowBump(1.0, 1.0, 0.0, 1.0),
        "sqrt log bump": LogPowBump(1.0, 1.0, 0.0, 0.5),
        "indicator": Indicator(Interval(0.0, 1.0)),
        "ex_discont k=2": Sum((Indicator(Interval(0.0, 1.0)),
                               transform(LogPowBump(1.0, 0.5, 0.0, 1.0), 0.5, 1.0, -0.5))),
    }
    out = {k: decreasing_rearrangement(compile_step(f, grid, dom)) for k, f in items.items()}
    out["two-level step"] = decreasing_rearrangement(StepFunction([0.0, 1.0, 2.0], [3.0, 1.0]))
    out["zero"] = decreasing_rearrangement(StepFunction([0.0, 2.0], [0.0]))
    return out


def sdr_transfer_suite(n: int = 25, seed: int = 3, corpus: dict | None = None) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    corpus = corpus or acceptance_corpus()
    names = sorted(corpus)
    res = CheckResult("SDR transfer (n = 1)")
    for _ in range(n):
        i, j = rng.choice(len(names), 2, replace=False)
        R = float(rng.uniform(0.2, 1.0))
        d = float(rng.uniform(0.02, R))
        c = float(rng.uniform(-(R - d / 2), R - d / 2))
        Q = Interval(c - d / 2, c + d / 2)
        chk = sdr_transfer_check(corpus[names[i]], corpus[names[j]], R, Q)
        res.record(chk["ok"], chk["lhs"] - chk["rhs_best"])
    return [res]


def run_all(seed: int = 0, n: int = 200) -> list[CheckResult]:
    return (rearrangement_suite(n, seed) + oscillation_suite(n, seed + 1)
            + jump_bound_suite(min(n, 50), seed + 2) + sdr_transfer_suite(min(n, 25), seed + 3))
