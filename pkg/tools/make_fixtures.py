"""Regenerate the committed fixture grids under tests/fixtures/.

Glyphs are stroked polylines rendered at 8x and box-downsampled to 32x32,
which gives genuinely gray, anti-aliased edges.

    python tools/make_fixtures.py
"""

import math
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from topoterrain.grid import GrayImage
from topoterrain.io import format_grid

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
SIZE = 32
SCALE = 8
STROKE = 3.5
# Glyph coordinates span about [3, 29]; shrinking keeps a blank margin so the
# glyphs can be translated without touching the image border.
GLYPH_SHRINK = 0.85


def arc(cx, cy, rx, ry, a0, a1, n=40):
    """Points on an ellipse; angles in degrees, clockwise from 3 o'clock (y down)."""
    pts = []
    for i in range(n + 1):
        a = math.radians(a0 + (a1 - a0) * i / n)
        pts.append((cx + rx * math.cos(a), cy + ry * math.sin(a)))
    return pts


def line(*pts):
    return list(pts)


GLYPHS = {
    "A": [line((4, 29), (16, 3), (28, 29)), line((10, 17), (22, 17))],
    "D": [line((8, 4), (8, 28)), line((8, 4), (14, 4)) + arc(14, 16, 11, 12, -90, 90) + [(8, 28)]],
    "H": [line((7, 4), (7, 28)), line((25, 4), (25, 28)), line((7, 16), (25, 16))],
    "I": [line((16, 4), (16, 28)), line((8, 4), (24, 4)), line((8, 28), (24, 28))],
    "J": [line((22, 4), (22, 20)) + arc(15, 20, 7, 8, 0, 160)],
    "K": [line((8, 4), (8, 28)), line((25, 4), (9, 16), (25, 28))],
    "L": [line((8, 4), (8, 28), (25, 28))],
    "M": [line((5, 28), (5, 4), (16, 28), (27, 4), (27, 28))],
    "N": [line((7, 28), (7, 4), (25, 28), (25, 4))],
    "O": [arc(16, 16, 10, 12, 0, 360, 80)],
    "P": [line((8, 28), (8, 4), (16, 4)) + arc(16, 10.5, 7, 6.5, -90, 90) + [(8, 17)]],
    "Q": [arc(16, 15, 10, 11.5, 0, 360, 80), line((18, 21), (27, 29))],
    "R": [line((8, 28), (8, 4), (16, 4)) + arc(16, 10.5, 7, 6.5, -90, 90) + [(8, 17)],
          line((15, 17), (25, 28))],
    "S": [arc(16, 10, 8, 6, -20, -270) + arc(16, 22, 8, 6, -90, 160)],
    "T": [line((5, 5), (27, 5)), line((16, 5), (16, 24))],
    "U": [line((8, 4), (8, 19)) + arc(16, 19, 8, 9, 180, 0) + [(24, 4)]],
    "V": [line((6, 4), (16, 28), (26, 4))],
    "W": [line((3, 4), (9, 28), (16, 4), (23, 28), (29, 4))],
    "X": [line((6, 4), (26, 28)), line((26, 4), (6, 28))],
    "Y": [line((6, 4), (16, 18), (26, 4)), line((16, 18), (16, 28))],
    "Z": [line((6, 5), (26, 5), (6, 27), (26, 27))],
}


def render(strokes, level=255, size=SIZE, width=STROKE, shrink=GLYPH_SHRINK):
    big = Image.new("L", (size * SCALE, size * SCALE), 0)
    draw = ImageDraw.Draw(big)
    r = width * SCALE / 2
    c = size / 2
    for pts in strokes:
        p = [((c + (x - c) * shrink) * SCALE, (c + (y - c) * shrink) * SCALE) for x, y in pts]
        draw.line(p, fill=level, width=round(width * SCALE), joint="curve")
        for x, y in (p[0], p[-1]):
            draw.ellipse((x - r, y - r, x + r, y + r), fill=level)
    small = big.resize((size, size), Image.BOX)
    return np.asarray(small, dtype=np.int32)


def ring():
    a = np.zeros((8, 8), dtype=np.int32)
    a[2:6, 2:6] = 200
    a[3:5, 3:5] = 0
    return a


def cross():
    a = np.zeros((16, 16), dtype=np.int32)
    a[6:10, 2:14] = 180
    a[2:14, 6:10] = 230
    return a


def a_island():
    # A larger A with a low crossbar, so the lake has room for an island.
    a = render([line((3, 30), (16, 2), (29, 30)), line((6.5, 23), (25.5, 23))])
    blob = render([[(16, 16), (16, 17)]], level=170, width=4)
    return np.maximum(a, blob)


# The I-pattern of the first example and the fixpoint printed beside it.
BAR_FILLED = np.array([
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 240, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 240, 240, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 240, 128, 128, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 128, 128, 48, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 128, 48, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 48, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
])


def bar_filled_original():
    a = np.zeros_like(BAR_FILLED)
    a[:, 5] = BAR_FILLED[:, 5]
    return a


def write(name, arr):
    (OUT / f"{name}.grid").write_text(format_grid(GrayImage(arr)))


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for ch, strokes in GLYPHS.items():
        write(f"glyph_{ch}", render(strokes))
    write("ring", ring())
    write("cross", cross())
    write("a_island", a_island())
    write("bar_filled", BAR_FILLED)
    write("bar", bar_filled_original())
    write("blank", np.zeros((32, 32), dtype=np.int32))
    write("constant", np.full((8, 8), 77, dtype=np.int32))


if __name__ == "__main__":
    main()
