"""Command-line front end: problem files in, result tables out.

Subcommands
-----------
``greenbound enclose1d problem.json [--h H] [--c C] [--sweep] [--out PATH]``
    Certified sub/super-solution pair on the unit interval; writes the
    nodal table (x, lower, upper) and a gap summary.  ``--sweep`` runs the
    mesh study instead and writes (h, c, eps, iterations, max_gap) rows.

``greenbound enclose2d problem.json [--out PATH] [--threads N] [--emit-plot]``
    Pointwise enclosures on a polygon; writes CSV rows
    point_x, point_y, lower, upper, width, rel_error.

``greenbound selftest``
    Fast containment/identity checks; nonzero exit on any failure.

Exit codes: 0 ok, 2 invalid input, 3 engine failure, 4 sign-indefinite
source without a supplied split.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from typing import Optional

import jsonschema

from . import oned as _oned
from . import twod as _twod
from .errors import GreenboundError, InputError, NeedsSplitError
from .expr import PiecewiseSource1D, SourceExpr, parse
from .geometry import Polygon
from .interval import Interval
from .quad import QuadConfig

PROBLEM_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "domain", "source"],
    "properties": {
        "schema": {"const": 1},
        "domain": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["type"],
                    "properties": {"type": {"const": "interval"}},
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "required": ["type", "vertices"],
                    "properties": {
                        "type": {"const": "polygon"},
                        "vertices": {
                            "type": "array",
                            "minItems": 3,
                            "items": {
                                "type": "array",
                                "items": {"type": "number"},
                                "minItems": 2,
                                "maxItems": 2,
                            },
                        },
                    },
                    "additionalProperties": False,
                },
            ]
        },
        "source": {
            "oneOf": [
                {"type": "string"},
                {
                    "type": "object",
                    "required": ["breakpoints", "pieces"],
                    "properties": {
                        "breakpoints": {"type": "array", "items": {"type": "number"}},
                        "pieces": {"type": "array", "items": {"type": "string"}},
                    },
                    "additionalProperties": False,
                },
            ]
        },
        "split": {
            "type": "object",
            "required": ["plus", "minus"],
            "properties": {
                "plus": {"type": "string"},
                "minus": {"type": "string"},
            },
            "additionalProperties": False,
        },
        "points": {
            "type": "array",
            "items": {
                "type": "array",
                "items": {"type": "number"},
                "minItems": 2,
                "maxItems": 2,
            },
        },
        "mfs": {
            "type": "object",
            "properties": {
                "n": {"type": "integer", "minimum": 3},
                "R_far": {"type": "number"},
                "R_near": {"type": "number"},
                "corner": {
                    "type": "array",
                    "items": {"type": "number"},
                    "minItems": 2,
                    "maxItems": 2,
                },
                "tol": {"type": "number"},
            },
            "additionalProperties": False,
        },
        "quad": {
            "type": "object",
            "properties": {
                "deg_u": {"type": "integer", "minimum": 1},
                "deg_k": {"type": "integer", "minimum": 1},
                "subdiv": {"type": "integer", "minimum": 1},
                "fan_splits": {"type": "integer", "minimum": 1},
                "tol": {"type": "number"},
            },
            "additionalProperties": False,
        },
        "oned": {
            "type": "object",
            "properties": {
                "h": {"type": "number"},
                "c": {"type": "number"},
                "eps_factor": {"type": "number"},
                "sweep_h": {"type": "array", "items": {"type": "number"}},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

_DEFAULT_SWEEP_H = [2.0**-5, 2.0**-6, 2.0**-7, 2.0**-8, 2.0**-9]


def _load_problem(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as e:
        raise InputError(f"cannot read problem file: {e}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"malformed JSON: {e}") from None
    try:
        jsonschema.validate(data, PROBLEM_SCHEMA)
    except jsonschema.ValidationError as e:
        raise InputError(f"problem file rejected: {e.message}") from None
    return data


def _parse_source_1d(spec):
    if isinstance(spec, str):
        f = parse(spec)
        if "y" in f.variables():
            raise InputError("1D source must not use the variable y")
        return f
    pieces = tuple(parse(p) for p in spec["pieces"])
    for p in pieces:
        if "y" in p.variables():
            raise InputError("1D source must not use the variable y")
    return PiecewiseSource1D(tuple(spec["breakpoints"]), pieces)


def _write_out(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _validate_mesh(h: float) -> None:
    n1 = round(1.0 / h) if h > 0 else 0
    if h <= 0 or n1 < 2 or abs(1.0 / h - n1) > 1e-9 or n1 * h != 1.0:
        raise InputError(
            f"mesh width {h} must tile [0, 1] exactly in binary64 (dyadic h works)"
        )


def _cmd_enclose1d(args) -> int:
    problem = _load_problem(args.problem)
    if problem["domain"]["type"] != "interval":
        raise InputError("enclose1d needs a domain of type 'interval'")
    f = _parse_source_1d(problem["source"])
    cfg = problem.get("oned", {})
    ev = _oned.GreenEvaluator(f)
    supf = ev.sup_abs_source()
    eps_factor = cfg.get("eps_factor", 0.25)

    if args.sweep:
        h_list = cfg.get("sweep_h", _DEFAULT_SWEEP_H)
        for h in h_list:
            _validate_mesh(h)
        rows = _oned.sweep(
            f,
            h_list,
            c_rule=(lambda h, sf: cfg["c"]) if "c" in cfg else None,
            eps_rule=lambda h, sf: eps_factor * h * sf,
        )
        _write_out(_oned.sweep_csv(rows), args.out)
        for r in rows:
            print(
                f"h={r.h:.6g} c={r.c:.3e} eps={r.eps:.3e} "
                f"iterations={r.iterations} max_gap={r.max_gap:.6e}",
                file=sys.stderr,
            )
        return 0

    h = args.h if args.h is not None else cfg.get("h", 2.0**-5)
    _validate_mesh(h)
    c = args.c if args.c is not None else cfg.get("c", 0.2 * supf * h * h)
    eps = eps_factor * h * supf
    upper = _oned.build_super(f, h, c, eps=eps)
    lower = _oned.build_sub(f, h, c, eps=eps)
    lines = ["x,lower,upper"]
    gap = 0.0
    for i, (lo_v, hi_v) in enumerate(zip(lower.grid.values, upper.grid.values)):
        lines.append(f"{i * h!r},{float(lo_v)!r},{float(hi_v)!r}")
        gap = max(gap, float(hi_v) - float(lo_v))
    _write_out("\n".join(lines) + "\n", args.out)
    print(
        f"h={h:.6g} c={c:.3e} eps={eps:.3e} "
        f"iterations={max(upper.iterations, lower.iterations)} max_gap={gap:.6e}",
        file=sys.stderr,
    )
    return 0


def _cmd_enclose2d(args) -> int:
    problem = _load_problem(args.problem)
    if problem["domain"]["type"] != "polygon":
        raise InputError("enclose2d needs a domain of type 'polygon'")
    poly = Polygon(problem["domain"]["vertices"])
    if not isinstance(problem["source"], str):
        raise InputError("2D sources must be a single expression string")
    f = parse(problem["source"])
    points = problem.get("points", [])
    if not points:
        _write_out("point_x,point_y,lower,upper,width,rel_error\n", args.out)
        return 0
    for p in points:
        if poly.locate(p) != 1:
            raise InputError(f"evaluation point {p} is not strictly interior")
    split = None
    if "split" in problem:
        split = _twod.SignedSplit(parse(problem["split"]["plus"]),
                                  parse(problem["split"]["minus"]))
    mfs_raw = problem.get("mfs", {})
    mfs_cfg = _twod.MfsConfig(
        n=mfs_raw.get("n", 69),
        R_far=mfs_raw.get("R_far", 1.2),
        R_near=mfs_raw.get("R_near", 1.05),
        corner=tuple(mfs_raw["corner"]) if "corner" in mfs_raw else None,
        tol=mfs_raw.get("tol", 1e-9),
    )
    quad_raw = problem.get("quad", {})
    quad_cfg = QuadConfig(
        tm_degrees=(quad_raw.get("deg_k", 8), quad_raw.get("deg_u", 8)),
        regular_subdiv=quad_raw.get("subdiv", 16),
        tol=quad_raw.get("tol", 1e-10),
        fan_splits=quad_raw.get("fan_splits", 1),
    )
    t0 = time.time()
    items = _twod.enclose_batch(
        poly, f, points, split=split, mfs_cfg=mfs_cfg, quad_cfg=quad_cfg,
        threads=args.threads,
    )
    _write_out(_twod.batch_csv(items), args.out)
    if args.emit_plot:
        plot_path = (args.out or "enclosure") + ".plot.csv"
        _write_out(_twod.batch_csv(items), plot_path)
    failures = [item for item in items if item.result is None]
    for item in failures:
        print(f"point {item.point}: {item.error}", file=sys.stderr)
    print(
        f"{len(items) - len(failures)}/{len(items)} points enclosed "
        f"in {time.time() - t0:.1f}s",
        file=sys.stderr,
    )
    if any(item.needs_split for item in failures):
        return 4
    return 0 if len(failures) < len(items) else 3


def _cmd_selftest(_args) -> int:
    import mpmath as mp

    from . import interval as iv
    from .oned import green_value
    from .quad import log_moment, singular_triangle
    from .geometry import Triangle
    import numpy as np
    import random

    mp.mp.dps = 40
    failures = []

    def report(name: str, ok: bool, detail: str = ""):
        status = "PASS" if ok else "FAIL"
        print(f"{status} {name}{(': ' + detail) if detail and not ok else ''}")
        if not ok:
            failures.append(name)

    rng = random.Random(12345)
    bad = 0
    for _ in range(2000):
        a = rng.uniform(-10, 10)
        b = rng.uniform(-10, 10)
        ia, ib = Interval.point(a), Interval.point(b)
        checks = [
            (ia + ib, mp.mpf(a) + mp.mpf(b)),
            (ia - ib, mp.mpf(a) - mp.mpf(b)),
            (ia * ib, mp.mpf(a) * mp.mpf(b)),
        ]
        if b != 0.0:
            checks.append((ia / ib, mp.mpf(a) / mp.mpf(b)))
        if a > 1e-6:
            checks.append((ia.log(), mp.log(a)))
            checks.append((ia.sqrt(), mp.sqrt(a)))
        checks.append((ia.sin(), mp.sin(a)))
        checks.append((ia.cos(), mp.cos(a)))
        for got, want in checks:
            if not (mp.mpf(got.lo) <= want <= mp.mpf(got.hi)):
                bad += 1
    report("interval-containment-2000-random", bad == 0, f"{bad} violations")

    lm = log_moment(Interval(1.0, 1.0), 0)
    report("log-moment-quarter", lm.lo <= -0.25 <= lm.hi and lm.width() < 1e-12)
    lm = log_moment(Interval(1.0, 1.0), 1)
    report("log-moment-ninth", lm.lo <= float(-mp.mpf(1) / 9) <= lm.hi)

    tri = Triangle(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]),
                   singular_vertex=0)
    got = singular_triangle(parse("1"), tri)
    want = mp.mpf(-0.5) + (mp.log(2) - 2 + mp.pi / 2) / 2
    report(
        "singular-triangle-closed-form",
        mp.mpf(got.lo) <= want <= mp.mpf(got.hi) and got.width() < 1e-8,
    )

    v = green_value(parse("1"), 0.5)
    report("green-value-eighth", v.lo <= 0.125 <= v.hi and v.width() < 1e-10)
    v = green_value(parse("1"), 0.25)
    report("green-value-quarter-point", v.lo <= 0.09375 <= v.hi)

    s = Interval(0.0, iv.PI.hi).sin()
    report("sin-quadrant-max", s.hi >= 1.0 and s.lo <= 0.0)

    print(f"{'FAIL' if failures else 'PASS'}: {len(failures)} failing checks")
    return 1 if failures else 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="greenbound",
        description="Rigorous pointwise enclosures for the Dirichlet Poisson problem",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p1 = sub.add_parser("enclose1d", help="certified 1D sub/super-solution pair")
    p1.add_argument("problem", help="problem file (JSON, schema 1)")
    p1.add_argument("--h", type=float, default=None, help="mesh width override")
    p1.add_argument("--c", type=float, default=None, help="boundary shift override")
    p1.add_argument("--sweep", action="store_true", help="run the mesh study")
    p1.add_argument("--out", default=None, help="output CSV path (default stdout)")
    p1.add_argument("--threads", type=int, default=1)
    p1.add_argument("--emit-plot", action="store_true")
    p1.set_defaults(fn=_cmd_enclose1d)

    p2 = sub.add_parser("enclose2d", help="pointwise 2D enclosures")
    p2.add_argument("problem", help="problem file (JSON, schema 1)")
    p2.add_argument("--out", default=None, help="output CSV path (default stdout)")
    p2.add_argument("--threads", type=int, default=1)
    p2.add_argument("--emit-plot", action="store_true")
    p2.set_defaults(fn=_cmd_enclose2d)

    p3 = sub.add_parser("selftest", help="fast verification subset")
    p3.set_defaults(fn=_cmd_selftest)

    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except NeedsSplitError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except GreenboundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
