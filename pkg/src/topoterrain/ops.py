"""Ready-made fill and expansion operations.

The three fill families share one rule shape: an element rises to the
largest of several minima, each taken over a fixed set of neighbors,

    e5 = max(e5, min(S1), min(S2), ...)

Expansion copies one neighbor instead. The literal rules are written once
for a reference direction; the other seven are produced by rotating
neighbor numbers around the ring.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import _kernels as K
from .engine import FORWARD_RASTER, CellFunction, Schedule, run_to_fixpoint
from .grid import (
    HIGH,
    BorderPolicy,
    Direction,
    DomainError,
    GrayImage,
    rotate_steps,
    shift_neighbor,
)

# e = min(e1, e4, e7): the line on the left side.
SIMPLE_BASE = (Direction.D4, ((1, 4, 7),))
# el = min(e1, e2, e3, e4), er = min(e1, e2, e3, e6): dales opened down.
DUAL_BASE = (Direction.D8, ((1, 2, 3, 4), (1, 2, 3, 6)))


def rotate_sets(sets, steps: int):
    return tuple(tuple(shift_neighbor(n, steps) for n in s) for s in sets)


def _table(sets) -> np.ndarray:
    width = max(len(s) for s in sets)
    arr = np.zeros((len(sets), width), dtype=np.int64)
    for i, s in enumerate(sets):
        arr[i, : len(s)] = s
    return arr


def maxmin_rule(name: str, sets) -> CellFunction:
    """Cell-function raising e5 to the largest minimum over ``sets``."""
    sets = tuple(tuple(s) for s in sets)
    for s in sets:
        if not s or 5 in s or any(not 1 <= n <= 9 for n in s):
            raise ValueError(f"bad neighbor set {s}")

    def update(nb, em, marked):
        best = nb.e5
        for s in sets:
            best = max(best, min(nb.e(n) for n in s))
        if best != nb.e5:
            return best, False
        return best, marked

    return CellFunction(name, update, (K.MAXMIN, _table(sets)), monotone_extensive=True)


def simple_sets(side: Direction):
    base, sets = SIMPLE_BASE
    return rotate_sets(sets, rotate_steps(base, side))


def dual_sets(open_direction: Direction):
    base, sets = DUAL_BASE
    return rotate_sets(sets, rotate_steps(base, open_direction))


def simple_rule(side: Direction) -> CellFunction:
    return maxmin_rule(f"simple-{side.name}", simple_sets(side))


def dales_lakes_rule(open_direction: Direction) -> CellFunction:
    return maxmin_rule(f"dales-lakes-{open_direction.name}", dual_sets(open_direction))


def hull_rule() -> CellFunction:
    sets = []
    for d in Direction:
        sets.extend(dual_sets(d))
    return maxmin_rule("hull", sets)


def expand_rule(toward: Direction) -> CellFunction:
    """Copy the neighbor opposite ``toward`` when it is higher.

    Stop-line elements (level 256) are never copied, so a line of them
    confines the wave and leaves everything beyond it untouched.
    """
    src = toward.opposite.value

    def update(nb, em, marked):
        v = nb.e(src)
        if nb.e5 < v < HIGH:
            return v, False
        return nb.e5, marked

    return CellFunction(f"expand-{toward.name}", update,
                        (K.EXPAND, np.array([[src]], dtype=np.int64)), monotone_extensive=True)


def _check_levels(img: GrayImage) -> None:
    if img.levels.min() < 0 or img.levels.max() > HIGH:
        raise DomainError("levels must lie in [0, 256]")


def _run(img, rule, sched, border):
    _check_levels(img)
    out, _ = run_to_fixpoint(img, rule, None, sched, border)
    return out


def simple_fill(img: GrayImage, side: Direction = Direction.D4,
                sched: Schedule = FORWARD_RASTER,
                border: BorderPolicy = BorderPolicy.NEUTRAL_LOW) -> GrayImage:
    """Raise each element to the minimum of the three-element line on ``side``."""
    return _run(img, simple_rule(side), sched, border)


def fill_dales_and_lakes(img: GrayImage, open_direction: Direction = Direction.D8,
                         sched: Schedule = FORWARD_RASTER,
                         border: BorderPolicy = BorderPolicy.NEUTRAL_LOW) -> GrayImage:
    """Fill every lake and every dale opened toward ``open_direction``."""
    return _run(img, dales_lakes_rule(open_direction), sched, border)


def convex_hull(img: GrayImage, sched: Schedule = FORWARD_RASTER,
                border: BorderPolicy = BorderPolicy.NEUTRAL_LOW) -> GrayImage:
    """Fill dales in all eight directions at once, and all lakes."""
    return _run(img, hull_rule(), sched, border)


@dataclass(frozen=True)
class StopLine:
    """Elements pinned at level 256 to bound an expansion."""

    placement: frozenset

    @classmethod
    def empty(cls) -> StopLine:
        return cls(frozenset())

    @classmethod
    def row(cls, y: int, width: int) -> StopLine:
        return cls(frozenset((x, y) for x in range(width)))

    @classmethod
    def column(cls, x: int, height: int) -> StopLine:
        return cls(frozenset((x, y) for y in range(height)))

    @classmethod
    def of(cls, coords: Iterable[tuple[int, int]]) -> StopLine:
        return cls(frozenset((int(x), int(y)) for x, y in coords))

    @classmethod
    def parse(cls, text: str, width: int, height: int) -> StopLine:
        """Parse ``row:Y`` / ``col:X`` items separated by commas."""
        coords: set = set()
        for item in filter(None, (t.strip() for t in text.split(","))):
            m = re.fullmatch(r"(row|col):(-?\d+)", item)
            if not m:
                raise ValueError(f"bad stop-line item {item!r}")
            k = int(m.group(2))
            if m.group(1) == "row":
                if not 0 <= k < height:
                    raise ValueError(f"row {k} outside image")
                coords |= cls.row(k, width).placement
            else:
                if not 0 <= k < width:
                    raise ValueError(f"column {k} outside image")
                coords |= cls.column(k, height).placement
        return cls(frozenset(coords))

    def __or__(self, other: StopLine) -> StopLine:
        return StopLine(self.placement | other.placement)

    def __bool__(self):
        return bool(self.placement)

    def mask(self, shape) -> np.ndarray:
        h, w = shape
        out = np.zeros(shape, dtype=bool)
        for x, y in self.placement:
            if not (0 <= x < w and 0 <= y < h):
                raise DomainError(f"stop-line element ({x}, {y}) outside image")
            out[y, x] = True
        return out

    def apply(self, img: GrayImage) -> GrayImage:
        m = self.mask(img.shape)
        return GrayImage(np.where(m, HIGH, img.levels), img.marks & ~m)


def expand(img: GrayImage, toward: Direction, stops: Optional[StopLine] = None,
           sched: Schedule = FORWARD_RASTER) -> GrayImage:
    """Propagate higher values toward ``toward`` until stop-lines or the border.

    Stop-line elements are set to 256. Nothing exceeds that, so they never
    change, and the rule never copies 256, so the wave cannot cross them.
    """
    if stops:
        img = stops.apply(img)
    return _run(img, expand_rule(toward), sched, BorderPolicy.NEUTRAL_LOW)


def all_operations():
    """Every shipped ops cell-function, by name."""
    rules = {}
    for d in Direction:
        rules[f"simple-{d.name}"] = simple_rule(d)
        rules[f"dales-lakes-{d.name}"] = dales_lakes_rule(d)
        rules[f"expand-{d.name}"] = expand_rule(d)
    rules["hull"] = hull_rule()
    return rules
