"""Command-line front end.

Reads function descriptors, runs one verb and writes JSON for scalar
results or CSV for curves and tables.  Exit codes: 0 success, 1 unknown
verb, 2 invalid input (one line naming the field), 3 a truncation that
did not stabilize, 4 a property suite with failures.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import DomainError, StabilizationError, ValidationError
from .examples import (ExampleId, converge_experiment, make_example, rearrange_example,
                       rows_to_csv)
from .funcspace import GridSpec, Interval, Node, StepFunction, compile_step, dump_descriptor, load_descriptor
from .properties import run_all
from .rearrange import (Dimension, RearrangementResult, decreasing_rearrangement,
                        is_rearrangeable, rearrange_truncated)
from .seminorm import bmo_distance, bmo_seminorm, vmo_modulus

VERBS = ("rearrange", "bmo", "vmo-modulus", "distance", "sdr", "example", "converge", "proptest")
EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_UNSTABLE, EXIT_PROPFAIL = 0, 1, 2, 3, 4
DEFAULT_DELTAS = (1e-1, 1e-2, 1e-3, 1e-4)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True) + "\n"


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rearrbmo", description="Rearrangements and BMO/VMO seminorms on the line.",
                                formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("verb", choices=VERBS, help="operation to run")
    p.add_argument("--input", action="append", default=[], metavar="PATH",
                   help="descriptor JSON; repeat twice for distance")
    p.add_argument("--out", metavar="PATH", help="output file; standard output when omitted")
    p.add_argument("--tol", type=float, default=1e-3,
                   help="relative tolerance of the supremum search [seminorm default]")
    p.add_argument("--delta", type=float, action="append", metavar="REAL",
                   help="VMO scales, repeatable; default 1e-1 1e-2 1e-3 1e-4 [modulus decades]")
    p.add_argument("--near-origin", action="store_true",
                   help="restrict VMO shapes to (x0, x0 + delta) [local modulus at the left end]")
    p.add_argument("--name", metavar="ID", help="example name, hyphens or underscores")
    p.add_argument("--k", type=int, help="sequence member of the example [k = 1 is the first]")
    p.add_argument("--kmax", type=int, default=10, help="last k of a convergence run [experiment default]")
    p.add_argument("--K", type=int, help="retained series terms [example default: 12, or 256 for series_b]")
    p.add_argument("--R", type=float, help="radius for sdr output [whole profile when omitted]")
    p.add_argument("--X", type=float,
                   help="half-line truncation length [example default 8 (n_k + e^k)]; required for "
                        "descriptors whose domain ends at inf")
    p.add_argument("--dim", type=int, default=1, help="dimension for sdr [the line]")
    p.add_argument("--seed", type=int, default=0, help="seed for proptest [fixed for reproducibility]")
    p.add_argument("--trials", type=int, default=200, help="random functions per proptest suite [acceptance count]")
    p.add_argument("--probe-alpha", type=float, help="level for the series rearrangeability probe")
    p.add_argument("--dump", action="store_true", help="print the example descriptor instead of computing")
    p.add_argument("--cells", type=int, default=GridSpec().base_cells,
                   help="uniform cells before grading [grid default]")
    return p


def _read_descriptor(path: str) -> tuple[Node, Interval | None, float | None]:
    """Parse a descriptor; a domain ending at ``inf`` returns ``(node, None, x0)``."""
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ValidationError("input", f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ValidationError("input", f"{path} is not valid JSON ({e.msg} at line {e.lineno})") from None
    dom = obj.get("domain") if isinstance(obj, dict) else None
    if isinstance(dom, list) and len(dom) == 2 and dom[1] in ("inf", math.inf):
        if not isinstance(dom[0], (int, float)) or isinstance(dom[0], bool):
            raise ValidationError("domain[0]", "expected a finite number")
        x0 = float(dom[0])
        node, _ = load_descriptor({**obj, "domain": [x0, x0 + 1.0]})
        return node, None, x0
    node, domain = load_descriptor(obj)
    return node, domain, None


class _Input:
    """A descriptor or a named example, rearranged on demand."""

    def __init__(self, args, index: int = 0):
        self.args = args
        self.grid = GridSpec(base_cells=args.cells)
        self.example = None
        if args.input:
            if index >= len(args.input):
                raise ValidationError("input", f"expected at least {index + 1} --input files")
            self.node, self.domain, self.x0 = _read_descriptor(args.input[index])
            if self.domain is None:
                if args.X is None:
                    raise ValidationError("X", "domain ends at inf; pass --X to truncate")
                if not args.X > 0:
                    raise ValidationError("X", "must be > 0")
                self.domain = Interval(self.x0, self.x0 + args.X)
        elif args.name:
            self.example = make_example(_example_id(args))
            self.node = self.example.f_k if args.k is not None and self.example.f_k is not None else self.example.f
            self.domain = self.example.domain
            self.x0 = None
            if self.domain is None:
                raise ValidationError("name", f"{self.example.id.name} is not rearrangeable on any finite domain")
        else:
            raise ValidationError("input", "pass --input PATH or --name ID")

    def step(self) -> StepFunction:
        return compile_step(self.node, self.grid, self.domain)

    def rearrange(self) -> RearrangementResult:
        if self.example is not None:
            r = rearrange_example(self.example, self.node, self.grid)
            if not r.truncation_stable:
                raise StabilizationError(f"{self.example.id.name} did not settle under domain doubling")
            return r
        if self.x0 is not None:
            return rearrange_truncated(self.node, self.grid, self.domain.length, self.x0, strict=True)
        return decreasing_rearrangement(self.step())


def _example_id(args) -> ExampleId:
    if not args.name:
        raise ValidationError("name", "required")
    return ExampleId(args.name, k=args.k, K=args.K, X=args.X)


def _cmd_rearrange(args) -> int:
    r = _Input(args).rearrange()
    _emit(r.to_csv(), args.out)
    meta = r.meta_json()
    if args.out:
        Path(args.out + ".meta.json").write_text(meta if meta.endswith("\n") else meta + "\n",
                                                 encoding="utf-8", newline="\n")
    return EXIT_OK


def _cmd_bmo(args) -> int:
    res = bmo_seminorm(_Input(args).step(), tol=args.tol)
    _emit(dumps(res.to_dict()), args.out)
    return EXIT_OK


def _deltas(args):
    d = tuple(args.delta) if args.delta else DEFAULT_DELTAS
    if any(not x > 0 for x in d):
        raise ValidationError("delta", "must be > 0")
    return tuple(sorted(set(d), reverse=True))


def _cmd_vmo(args) -> int:
    curve = vmo_modulus(_Input(args).step(), _deltas(args), near_origin=args.near_origin, tol=args.tol)
    _emit(curve.to_csv(), args.out)
    return EXIT_OK


def _cmd_distance(args) -> int:
    if len(args.input) != 2:
        raise ValidationError("input", "distance takes exactly two --input files")
    a, b = _Input(args, 0), _Input(args, 1)
    if a.domain != b.domain:
        raise ValidationError("domain", f"domains differ: {tuple(a.domain)} vs {tuple(b.domain)}")
    res = bmo_distance(a.step(), b.step(), tol=args.tol)
    _emit(dumps(res.to_dict()), args.out)
    return EXIT_OK


def _cmd_sdr(args) -> int:
    if args.dim < 1:
        raise ValidationError("dim", "must be >= 1")
    r = _Input(args).rearrange()
    dim = Dimension(args.dim)
    x, v = r.fstar.breakpoints, r.fstar.values
    radii = (x / dim.omega_n) ** (1.0 / args.dim)
    if args.R is not None:
        if not 0 < args.R:
            raise ValidationError("R", "must be > 0")
        if args.R > radii[-1] * (1 + 1e-12):
            raise ValidationError("R", f"exceeds the profile radius {radii[-1]!r}")
        keep = int(np.searchsorted(radii, args.R, side="left"))
        radii = np.concatenate([radii[:keep], [args.R]])
        v = v[:keep]
    lines = ["r_left,r_right,value"]
    lines += [f"{float(radii[i])!r},{float(radii[i + 1])!r},{float(v[i])!r}" for i in range(v.size)]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_example(args) -> int:
    ex = make_example(_example_id(args))
    if args.dump:
        node = ex.f_k if args.k is not None and ex.f_k is not None else ex.f
        dom = ex.domain
        if dom is None:
            lo, hi = node.support()
            dom = Interval(min(lo, 0.0), hi)
        _emit(dumps(dump_descriptor(node, dom)), args.out)
        return EXIT_OK
    if ex.spec is not None and (args.probe_alpha is not None or ex.domain is None):
        alpha = args.probe_alpha if args.probe_alpha is not None else 10.0
        spec = ex.tail_spec or ex.spec
        _emit(dumps(is_rearrangeable(spec, alpha)), args.out)
        return EXIT_OK
    if args.probe_alpha is not None:
        raise ValidationError("probe-alpha", "only series examples take a rearrangeability probe")
    inp = _Input(args)
    r = inp.rearrange()
    out = {"name": ex.id.name, "k": args.k, "domain": list(inp.domain), **r.meta()}
    _emit(dumps(out), args.out)
    return EXIT_OK


def _cmd_converge(args) -> int:
    if not args.name:
        raise ValidationError("name", "required")
    rows = converge_experiment(ExampleId(args.name, X=args.X), args.kmax,
                               grid=GridSpec(base_cells=args.cells), tol=args.tol)
    _emit(rows_to_csv(rows), args.out)
    return EXIT_OK


def _cmd_proptest(args) -> int:
    if args.trials < 1:
        raise ValidationError("trials", "must be >= 1")
    results = run_all(seed=args.seed, n=args.trials)
    out = [{"name": r.name, "trials": r.trials, "failures": r.failures, "passed": r.passed} for r in results]
    _emit(dumps({"seed": args.seed, "checks": out, "all_passed": all(r.passed for r in results)}), args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_PROPFAIL


COMMANDS = {"rearrange": _cmd_rearrange, "bmo": _cmd_bmo, "vmo-modulus": _cmd_vmo,
            "distance": _cmd_distance, "sdr": _cmd_sdr, "example": _cmd_example,
            "converge": _cmd_converge, "proptest": _cmd_proptest}


def dispatch(argv: list[str]) -> int:
    parser = _parser()
    if not argv or (argv[0] not in VERBS and not argv[0].startswith("-")):
        sys.stderr.write(parser.format_usage())
        if argv:
            sys.stderr.write(f"rearrbmo: unknown verb {argv[0]!r}\n")
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INVALID
    try:
        return COMMANDS[args.verb](args)
    except ValidationError as e:
        sys.stderr.write(f"error: {e.field}: {e.message}\n")
        return EXIT_INVALID
    except DomainError as e:
        sys.stderr.write(f"error: domain: {e}\n")
        return EXIT_INVALID
    except StabilizationError as e:
        sys.stderr.write(f"error: truncation: {e}\n")
        return EXIT_UNSTABLE


def main(argv: list[str] | None = None) -> int:
    return dispatch(list(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    sys.exit(main())
