"""Command-line interface.

Exit codes: 0 success, 1 verification or witness failure, 2 invalid input.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import constructions as C
from .decomposition import diameter_report, max_multiplicity, validate
from .io import dumps, load_decomposition, read_json, save_decomposition
from .render import RenderSpec, render_svg
from .sphere import minimize_diameter
from .witness import DEFAULT_DELTA, DEFAULT_H_MIN, find_witness

OK, FAILED, INVALID = 0, 1, 2

KINDS = ("grid", "ball-grid", "offset-bricks", "shells", "pancakes", "simplex-ball",
         "equilateral-disk", "hex-prism")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    construction: Optional[str] = None
    params: dict = field(default_factory=dict)
    h: Optional[float] = None
    delta: float = 1e-9
    tol: Optional[float] = None
    output: Optional[str] = None
    seed: int = 0

    def check(self) -> "RunConfig":
        for name in ("h", "delta", "tol"):
            v = getattr(self, name)
            if v is not None and not (v > 0 and math.isfinite(v)):
                raise UsageError(f"--{name} must be positive")
        if self.h is not None and self.delta >= self.h:
            raise UsageError("--delta must be smaller than --h")
        return self


def _emit(obj, output: Optional[str]) -> None:
    text = dumps(obj)
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def build(kind: str, a: argparse.Namespace):
    dim = a.dim
    if kind == "grid":
        return C.build_grid(dim or 2, a.k)
    if kind == "ball-grid":
        return C.build_ball_grid(dim or 2, a.k)
    if kind == "offset-bricks":
        return C.build_offset_bricks(a.width, a.height, a.offset)
    if kind == "shells":
        return C.build_shells(dim or 2)
    if kind == "pancakes":
        return C.build_pancakes(dim or 2, a.m, a.w if a.w is not None else math.pi / 4)
    if kind == "simplex-ball":
        return C.build_simplex_ball(dim or 3, a.t)
    if kind == "equilateral-disk":
        return C.build_equilateral_disk()
    if kind == "hex-prism":
        return C.build_hex_prism(a.eps, layers=a.layers)
    raise UsageError(f"unknown construction {kind!r}")


def cmd_construct(a) -> int:
    RunConfig("construct", a.kind, output=a.output).check()
    d = build(a.kind, a)
    if a.output:
        save_decomposition(a.output, d)
    else:
        sys.stdout.write(dumps(d.to_dict()))
    return OK


def cmd_verify(a) -> int:
    cfg = RunConfig("verify", h=a.h, delta=a.delta, output=a.output, seed=a.seed).check()
    d = load_decomposition(a.file)
    val = validate(d, cfg.h)
    dia = diameter_report(d, cfg.h)
    mult = max_multiplicity(d, cfg.h, cfg.delta, random=a.random, seed=cfg.seed)
    declared = d.declared_multiplicity
    ok = val.valid and (declared is None or mult.max_multiplicity == declared)
    _emit({"schema": "lebesgue-lab/1", "kind": "verify-report", "validation": val.to_dict(),
           "diameters": dia.to_dict(), "multiplicity": mult.to_dict(),
           "declared_multiplicity": declared, "ok": ok}, cfg.output)
    return OK if ok else FAILED


def cmd_witness(a) -> int:
    RunConfig("witness", delta=a.delta, tol=a.h_min, output=a.output).check()
    d = load_decomposition(a.file)
    rep = find_witness(d, a.delta, a.h_min)
    ok = rep.success(d.dimension)
    _emit({"schema": "lebesgue-lab/1", "kind": "witness-report", **rep.to_dict(), "ok": ok}, a.output)
    return OK if ok else FAILED


def cmd_optimize(a) -> int:
    RunConfig("optimize-sphere", output=a.output, seed=a.seed).check()
    if a.dim not in (2, 3, 4) or a.starts < 1:
        raise UsageError("--dim must be 2, 3 or 4 and --starts positive")
    cfg, diam, runs = minimize_diameter(a.dim, a.starts, a.seed)
    _emit({"schema": "lebesgue-lab/1", "kind": "sphere-optimum", "dimension": a.dim, "seed": a.seed,
           "diameter": diam, "simplex_diameter": math.sqrt(2 + 2 / a.dim), "config": cfg.to_dict(),
           "starts": [r.to_dict() for r in runs]}, a.output)
    return OK


def cmd_balance(a) -> int:
    RunConfig("balance", output=a.output).check()
    if a.dim < 2:
        raise UsageError("--dim must be at least 2")
    t, diam = C.balance_scale(a.dim)
    _emit({"schema": "lebesgue-lab/1", "kind": "balance", "dimension": a.dim, "t": t,
           "diameter": diam, "core_diameter": C.core_diameter(a.dim, t),
           "wing_diameter": C.wing_diameter(a.dim, t)}, a.output)
    return OK


def cmd_render(a) -> int:
    d = load_decomposition(a.file)
    if a.size <= 0:
        raise UsageError("--size must be positive")
    svg = render_svg(RenderSpec(d, stroke_width=a.stroke, size=a.size))
    if a.output:
        Path(a.output).write_text(svg)
    else:
        sys.stdout.write(svg)
    return OK


def cmd_report(a) -> int:
    for f in a.files:
        data = read_json(f)
        if "pieces" in data:
            dims = [p.get("analytic_diameter") for p in data["pieces"]]
            known = [x for x in dims if x is not None]
            line = (f"{f}: decomposition, dimension {data['dimension']}, {len(dims)} pieces, "
                    f"declared multiplicity {data.get('declared_multiplicity')}, "
                    f"max analytic diameter {max(known) if known else 'n/a'}")
        else:
            keys = {k: data[k] for k in ("kind", "ok", "diameter", "multiplicity", "t") if k in data}
            if isinstance(keys.get("multiplicity"), dict):
                keys["multiplicity"] = keys["multiplicity"]["max_multiplicity"]
            line = f"{f}: " + json.dumps(keys, sort_keys=True)
        print(line)
    return OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lebesgue-lab", description="Covering-dimension decompositions and their checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("construct", help="build a model decomposition")
    c.add_argument("--kind", required=True, choices=KINDS)
    c.add_argument("--dim", type=int)
    c.add_argument("--k", type=int, default=3, help="cells per axis for grids")
    c.add_argument("--t", type=float, default=C.DEFAULT_T, help="simplex scale for simplex-ball")
    c.add_argument("--m", type=int, default=5, help="pancake layer count")
    c.add_argument("--w", type=float, help="pancake cap angle")
    c.add_argument("--eps", type=float, default=0.05, help="hex prism diameter slack")
    c.add_argument("--layers", type=int, default=1)
    c.add_argument("--width", type=float, default=0.5)
    c.add_argument("--height", type=float, default=0.25)
    c.add_argument("--offset", type=float)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", help="coverage, diameters and multiplicity of a decomposition")
    v.add_argument("file")
    v.add_argument("--h", type=float, default=0.02)
    v.add_argument("--delta", type=float, default=1e-9)
    v.add_argument("--random", type=int, default=0)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("-o", "--output")
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("witness", help="search for a point where n+1 pieces meet")
    w.add_argument("file")
    w.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    w.add_argument("--h-min", type=float, default=DEFAULT_H_MIN)
    w.add_argument("-o", "--output")
    w.set_defaults(func=cmd_witness)

    s = sub.add_parser("optimize-sphere", help="minimise the diameter of hemisphere-free point sets")
    s.add_argument("--dim", type=int, required=True)
    s.add_argument("--starts", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_optimize)

    b = sub.add_parser("balance", help="simplex scale equalising core and wing diameters")
    b.add_argument("--dim", type=int, required=True)
    b.add_argument("-o", "--output")
    b.set_defaults(func=cmd_balance)

    r = sub.add_parser("render", help="SVG drawing of a planar decomposition")
    r.add_argument("file")
    r.add_argument("--size", type=int, default=512)
    r.add_argument("--stroke", type=float, default=1.0)
    r.add_argument("-o", "--output")
    r.set_defaults(func=cmd_render)

    rp = sub.add_parser("report", help="one-line summaries of JSON artifacts")
    rp.add_argument("files", nargs="+")
    rp.set_defaults(func=cmd_report)
    return p


def run(argv=None) -> int:
    try:
        args = parser().parse_args(argv)
        return args.func(args)
    except UsageError as e:
        print(f"lebesgue-lab: error: {e}", file=sys.stderr)
        return INVALID
    except (ValueError, OSError, KeyError) as e:
        print(f"lebesgue-lab: error: {e}", file=sys.stderr)
        return INVALID


def main() -> None:
    sys.exit(run())
