"""Command-line entry point.

    topoterrain fill IN [-o OUT] --op {simple,dales-lakes,hull,expand} ...
    topoterrain features IN --what {lakes,dales,cascade} ...
    topoterrain classify IN [--table T] [--gates K=V,...]
    topoterrain render IN

Results go to standard output (JSON or an image), diagnostics to standard
error. Exit status: 0 success, 2 bad input, 3 no fixpoint reached.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import classify as cls
from .engine import ExtensivityError, NonConvergenceError, Schedule, run_to_fixpoint
from .features import Gates, extract_dales, extract_lakes, waterfall_cascade
from .grid import BorderPolicy, Direction, DomainError, GrayImage
from .io import FormatError, format_grid, format_mask, read_image, write_image
from .ops import StopLine, dales_lakes_rule, expand_rule, hull_rule, simple_rule

SCHEMA = "topoterrain/1"
EXIT_INPUT = 2
EXIT_NONCONVERGENCE = 3
MARK_GLYPH = "·"

_DEFAULT_DIR = {"simple": Direction.D4, "dales-lakes": Direction.D8}


class UsageError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _schedule(args) -> Schedule:
    try:
        return Schedule.parse(args.schedule, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _direction(text):
    try:
        return Direction.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _fill_rule(args, img: GrayImage):
    if args.stops and args.op != "expand":
        raise UsageError("--stops applies to --op expand only")
    if args.op == "hull":
        return hull_rule(), img
    if args.op == "expand":
        if args.dir is None:
            raise UsageError("--op expand needs --dir")
        if args.stops:
            img = StopLine.parse(args.stops, img.width, img.height).apply(img)
        return expand_rule(args.dir), img
    d = args.dir or _DEFAULT_DIR[args.op]
    if args.op == "simple":
        return simple_rule(d), img
    return dales_lakes_rule(d), img


def cmd_fill(args, out) -> int:
    img = read_image(args.input)
    rule, img = _fill_rule(args, img)
    border = BorderPolicy(args.border)
    if args.op == "expand":
        border = BorderPolicy.NEUTRAL_LOW
    result, report = run_to_fixpoint(img, rule, None, _schedule(args), border,
                                     max_sweeps=args.max_sweeps)
    if args.output:
        write_image(result, args.output)
        if args.stats:
            out.write(report.to_json() + "\n")
    else:
        out.write(format_grid(result))
        if args.stats:
            sys.stderr.write(report.to_json() + "\n")
    return 0


def _write_masks(objs, directory):
    if directory is None:
        return
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for o in objs:
        (d / f"{o.id}.grid").write_text(format_mask(o.mask))


def cmd_features(args, out) -> int:
    img = read_image(args.input)
    gates = Gates(min_area=args.min_area, min_depth=args.min_depth)
    doc = {"schema": SCHEMA, "what": args.what, "width": img.width, "height": img.height}
    if args.what == "lakes":
        objs = extract_lakes(img, gates)
        doc["objects"] = [o.to_dict() for o in objs]
        _write_masks(objs, args.masks)
    elif args.what == "dales":
        d = args.dir or Direction.D8
        objs = extract_dales(img, d, gates)
        doc["direction"] = d.name
        doc["objects"] = [o.to_dict() for o in objs]
        _write_masks(objs, args.masks)
    else:
        root = waterfall_cascade(img, args.max_depth, _schedule(args))
        doc["max_depth"] = args.max_depth
        doc["root"] = root.to_dict()
        _write_masks([n.object for n in root.walk()], args.masks)
    out.write(_dump(doc))
    return 0


def cmd_classify(args, out) -> int:
    img = read_image(args.input)
    try:
        gates = Gates.parse(args.gates) if args.gates else Gates()
        table = cls.SignatureTable.load(args.table)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad table or gates: {exc}") from None
    sig = cls.signature(img, gates)
    doc = {
        "schema": SCHEMA,
        "signature": sig.to_dict(),
        "ranking": cls.rank_details(sig, table),
    }
    out.write(_dump(doc))
    return 0


def render_text(img: GrayImage) -> str:
    cells = [[MARK_GLYPH if m else str(int(v)) for v, m in zip(lr, mr)]
             for lr, mr in zip(img.levels, img.marks)]
    width = max(len(c) for row in cells for c in row)
    return "".join(" ".join(c.rjust(width) for c in row) + "\n" for row in cells)


def cmd_render(args, out) -> int:
    out.write(render_text(read_image(args.input)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="topoterrain", description="Topographic fixpoint operations on gray images.")
    sub = p.add_subparsers(dest="command", required=True)

    def schedule_opts(sp):
        sp.add_argument("--schedule", default="forward",
                        help="forward, backward, alternating, worklist or random")
        sp.add_argument("--seed", type=int, help="seed for the random schedule")

    f = sub.add_parser("fill", help="run a fill or expansion to its fixpoint")
    f.add_argument("input")
    f.add_argument("-o", "--output", help="output file (.grid or .pgm); default standard output")
    f.add_argument("--op", required=True, choices=["simple", "dales-lakes", "hull", "expand"])
    f.add_argument("--dir", type=_direction, help="side, open direction or expansion direction (D1..D9)")
    f.add_argument("--stops", help="stop-lines for expand, e.g. row:31,col:0")
    f.add_argument("--border", default="low", choices=[b.value for b in BorderPolicy])
    f.add_argument("--max-sweeps", type=int)
    f.add_argument("--stats", action="store_true", help="emit the fixpoint report as JSON")
    schedule_opts(f)
    f.set_defaults(func=cmd_fill)

    g = sub.add_parser("features", help="extract lakes, dales or the waterfall hierarchy")
    g.add_argument("input")
    g.add_argument("--what", required=True, choices=["lakes", "dales", "cascade"])
    g.add_argument("--dir", type=_direction, help="open direction for dales (default D8)")
    g.add_argument("--min-area", type=int, default=Gates.min_area)
    g.add_argument("--min-depth", type=int, default=Gates.min_depth)
    g.add_argument("--max-depth", type=int, default=4)
    g.add_argument("--masks", help="directory for one mask grid per object")
    schedule_opts(g)
    g.set_defaults(func=cmd_features)

    c = sub.add_parser("classify", help="rank table characters for a glyph")
    c.add_argument("input")
    c.add_argument("--table", help="signature table JSON (default: the shipped table)")
    c.add_argument("--gates", help="e.g. min_area=2,min_depth=8,small_fraction=0.1")
    c.set_defaults(func=cmd_classify)

    r = sub.add_parser("render", help="print an image as aligned integers")
    r.add_argument("input")
    r.add_argument("--palette", default="ascii", choices=["ascii"])
    r.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, sys.stdout)
    except NonConvergenceError as exc:
        print(f"topoterrain: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (FormatError, DomainError, UsageError, ExtensivityError, OSError, ValueError) as exc:
        print(f"topoterrain: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
