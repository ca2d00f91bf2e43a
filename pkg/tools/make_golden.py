"""Regenerate the golden CLI outputs under tests/golden/.

    python tools/make_golden.py

Review the diff before committing: the golden files pin the JSON schemas
and the text rendering.
"""

import contextlib
import io
import sys
from pathlib import Path

from topoterrain.cli import main

ROOT = Path(__file__).resolve().parent.parent
FIX = ROOT / "tests" / "fixtures"
OUT = ROOT / "tests" / "golden"

# golden file name -> argv (fixture paths relative to tests/fixtures)
CASES = {
    "render_bar_filled.txt": ["render", "bar_filled.grid"],
    "fill_bar_simple.grid": ["fill", "bar.grid", "--op", "simple", "--dir", "D4"],
    "features_ring_lakes.json": ["features", "ring.grid", "--what", "lakes"],
    "features_blank_lakes.json": ["features", "blank.grid", "--what", "lakes"],
    "features_a_dales.json": ["features", "glyph_A.grid", "--what", "dales", "--dir", "D8"],
    "features_a_island_cascade.json": ["features", "a_island.grid", "--what", "cascade", "--max-depth", "4"],
    "classify_o.json": ["classify", "glyph_O.grid"],
    "classify_s.json": ["classify", "glyph_S.grid"],
    "classify_blank.json": ["classify", "blank.grid"],
}


def run(argv):
    args = [a if not a.endswith(".grid") else str(FIX / a) for a in argv]
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(args)
    if code != 0:
        sys.exit(f"{argv}: exit {code}")
    return buf.getvalue()


def regenerate():
    OUT.mkdir(exist_ok=True)
    for name, argv in CASES.items():
        (OUT / name).write_text(run(argv))


if __name__ == "__main__":
    regenerate()
