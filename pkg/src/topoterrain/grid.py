"""Images on the 8-connected pixel graph.

An image is a rectangle of integer levels plus a boolean mark plane.
Ordinary levels lie in [0, 255]; 256 is reserved for stop-lines and frames.
A marked element belongs to the "empty" phase: its level is irrelevant and
is stored as 0, and the ASCII format writes it as -1.

Coordinates are (x, y) with y growing downward, so "up" is row y - 1, which
is neighbor e2 in the layout

    e1 e2 e3
    e4 e5 e6
    e7 e8 e9
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

LEVEL_MIN = -1
LEVEL_MAX = 256
HIGH = 256
MARK = -1


class CoordinateError(IndexError):
    pass


class DomainError(ValueError):
    pass


class BorderPolicy(enum.Enum):
    """Value seen at out-of-bounds neighbor positions."""

    NEUTRAL_LOW = "low"
    NEUTRAL_HIGH = "high"
    CLAMP = "clamp"


# Clockwise ring of neighbor numbers starting at e1; rotations shift along it.
RING = (1, 2, 3, 6, 9, 8, 7, 4)

OFFSETS = {
    1: (-1, -1), 2: (0, -1), 3: (1, -1),
    4: (-1, 0), 5: (0, 0), 6: (1, 0),
    7: (-1, 1), 8: (0, 1), 9: (1, 1),
}


class Direction(enum.Enum):
    """The eight directions, named after the neighbor lying that way."""

    D1 = 1
    D2 = 2
    D3 = 3
    D4 = 4
    D6 = 6
    D7 = 7
    D8 = 8
    D9 = 9

    @property
    def offset(self) -> tuple[int, int]:
        return OFFSETS[self.value]

    @property
    def opposite(self) -> Direction:
        return Direction(10 - self.value)

    @property
    def is_cardinal(self) -> bool:
        return self.value in (2, 4, 6, 8)

    def shifted(self, steps: int) -> Direction:
        """Rotate clockwise by ``steps`` eighths of a turn."""
        i = RING.index(self.value)
        return Direction(RING[(i + steps) % 8])

    @property
    def label(self) -> str:
        return _LABELS[self.value]

    @classmethod
    def parse(cls, text: str) -> Direction:
        t = text.strip().lower()
        for d in cls:
            if t in (d.name.lower(), str(d.value), d.label):
                return d
        raise ValueError(f"unknown direction {text!r}")


_LABELS = {
    1: "up-left", 2: "up", 3: "up-right", 4: "left",
    6: "right", 7: "down-left", 8: "down", 9: "down-right",
}

CARDINALS = (Direction.D2, Direction.D4, Direction.D6, Direction.D8)


def shift_neighbor(n: int, steps: int) -> int:
    """Rotate neighbor number ``n`` clockwise by ``steps`` eighths (e5 is fixed)."""
    if n == 5:
        return 5
    return RING[(RING.index(n) + steps) % 8]


def rotate_steps(src: Direction, dst: Direction) -> int:
    return (RING.index(dst.value) - RING.index(src.value)) % 8


class GrayImage:
    """Levels and marks on a finite rectangle.

    Arrays are stored read-only with shape (height, width). Levels under a
    mark are normalized to 0 so that the ASCII round-trip is exact.
    """

    __slots__ = ("levels", "marks")

    def __init__(self, levels, marks=None):
        lv = np.array(levels, dtype=np.int32, copy=True)
        if lv.ndim != 2 or lv.size == 0:
            raise DomainError("levels must be a non-empty 2-D array")
        if marks is None:
            mk = np.zeros(lv.shape, dtype=bool)
        else:
            mk = np.array(marks, dtype=bool, copy=True)
            if mk.shape != lv.shape:
                raise DomainError(f"marks shape {mk.shape} != levels shape {lv.shape}")
        lv[mk] = 0
        if lv.min() < LEVEL_MIN or lv.max() > LEVEL_MAX:
            raise DomainError(f"levels outside [{LEVEL_MIN}, {LEVEL_MAX}]")
        lv.flags.writeable = False
        mk.flags.writeable = False
        self.levels = lv
        self.marks = mk

    @classmethod
    def zeros(cls, width: int, height: int, level: int = 0) -> GrayImage:
        return cls(np.full((height, width), level, dtype=np.int32))

    @property
    def width(self) -> int:
        return self.levels.shape[1]

    @property
    def height(self) -> int:
        return self.levels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.levels.shape

    @property
    def is_multiphase(self) -> bool:
        return bool(self.marks.any() and not self.marks.all())

    def with_levels(self, levels) -> GrayImage:
        return GrayImage(levels, self.marks)

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.levels, other.levels)
            and np.array_equal(self.marks, other.marks)
        )

    def __hash__(self):
        return hash((self.shape, self.levels.tobytes(), self.marks.tobytes()))

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height}, marked={int(self.marks.sum())})"

    def external(self) -> np.ndarray:
        """Levels with marked elements encoded as -1."""
        out = self.levels.copy()
        out[self.marks] = MARK
        return out

    @classmethod
    def from_external(cls, values) -> GrayImage:
        v = np.asarray(values, dtype=np.int32)
        return cls(np.where(v == MARK, 0, v), v == MARK)


class Neighborhood(NamedTuple):
    """Values e1..e9 around a central element (index 0 holds e1)."""

    values: tuple[int, ...]
    in_bounds: tuple[bool, ...]
    marked: tuple[bool, ...]

    def e(self, n: int) -> int:
        return self.values[n - 1]

    @property
    def e5(self) -> int:
        return self.values[4]


def _border_value(img: GrayImage, x: int, y: int, border: BorderPolicy) -> int:
    if border is BorderPolicy.NEUTRAL_LOW:
        return 0
    if border is BorderPolicy.NEUTRAL_HIGH:
        return HIGH
    cx = min(max(x, 0), img.width - 1)
    cy = min(max(y, 0), img.height - 1)
    return int(img.levels[cy, cx])


def neighborhood_at(img: GrayImage, x: int, y: int,
                    border: BorderPolicy = BorderPolicy.NEUTRAL_LOW) -> Neighborhood:
    if not (0 <= x < img.width and 0 <= y < img.height):
        raise CoordinateError(f"({x}, {y}) outside {img.width}x{img.height}")
    values, inb, marked = [], [], []
    for n in range(1, 10):
        dx, dy = OFFSETS[n]
        nx, ny = x + dx, y + dy
        if 0 <= nx < img.width and 0 <= ny < img.height:
            values.append(int(img.levels[ny, nx]))
            inb.append(True)
            marked.append(bool(img.marks[ny, nx]))
        else:
            values.append(_border_value(img, nx, ny, border))
            inb.append(False)
            marked.append(False)
    return Neighborhood(tuple(values), tuple(inb), tuple(marked))


def _check_same_shape(a: GrayImage, b: GrayImage) -> None:
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch: {a.width}x{a.height} vs {b.width}x{b.height}")


def pointwise_subtract(a: GrayImage, b: GrayImage, background: int = 0) -> GrayImage:
    """Positive part of ``a - b`` as a two-phase image.

    With ``background=0`` the result is single-phase and 0 means "no
    difference". With ``background=-1`` the background is an explicit phase
    and is marked, so it serializes as -1.
    """
    _check_same_shape(a, b)
    if background not in (0, MARK):
        raise DomainError("background must be 0 or -1")
    diff = a.levels - b.levels
    if (diff < 0).any():
        y, x = np.argwhere(diff < 0)[0]
        raise DomainError(f"a < b at ({x}, {y})")
    positive = diff > 0
    if background == MARK:
        return GrayImage(diff, ~positive)
    return GrayImage(diff)


def invert(img: GrayImage) -> GrayImage:
    lv = img.levels[~img.marks]
    if lv.size and (lv.min() < 0 or lv.max() > 255):
        raise DomainError("invert needs levels in [0, 255]")
    return GrayImage(np.where(img.marks, 0, 255 - img.levels), img.marks)


def object_phase(img: GrayImage) -> np.ndarray:
    """Elements of the object phase of a two-phase image.

    When the image carries marks the object is everything unmarked;
    otherwise 0 stands for "no difference" and the object is the positive part.
    """
    if img.marks.any():
        return ~img.marks
    return img.levels > 0


def rot90(img: GrayImage, k: int = 1) -> GrayImage:
    """Rotate counter-clockwise by k quarter turns."""
    return GrayImage(np.rot90(img.levels, k), np.rot90(img.marks, k))


def rotate_direction(d: Direction, k: int = 1) -> Direction:
    """Direction after ``k`` counter-clockwise quarter turns of the image."""
    return d.shifted(-2 * k)
