"""Topographic objects: lakes, directional dales, and the waterfall cascade."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy import ndimage

from . import _kernels as K
from .engine import FORWARD_RASTER, CellFunction, Schedule, run_to_fixpoint
from .grid import (
    HIGH,
    Direction,
    DomainError,
    GrayImage,
    invert,
    object_phase,
    pointwise_subtract,
)
from .ops import fill_dales_and_lakes

EIGHT = np.ones((3, 3), dtype=bool)
FOUR = ndimage.generate_binary_structure(2, 1)


class ObjectKind(enum.Enum):
    BACKGROUND = "background"
    OBJECT = "object"
    LAKE = "lake"
    ISLAND = "island"
    DALE = "dale"


@dataclass(frozen=True)
class Gates:
    """Noise thresholds for extracted lakes and dales.

    A dale is small when its area is below ``small_fraction`` of the glyph
    bounding box, or below ``small_relative`` of the largest dale.
    """

    min_area: int = 2
    min_depth: int = 8
    small_fraction: float = 0.10
    small_relative: float = 0.65

    @classmethod
    def parse(cls, text: str) -> Gates:
        """Parse ``key=value`` pairs separated by commas."""
        kw = {}
        types = {"min_area": int, "min_depth": int, "small_fraction": float, "small_relative": float}
        for item in filter(None, (t.strip() for t in text.split(","))):
            key, sep, val = item.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or key not in types:
                raise ValueError(f"bad gate {item!r}")
            kw[key] = types[key](val)
        return cls(**kw)


@dataclass(eq=False)
class TopoObject:
    kind: ObjectKind
    mask: np.ndarray
    values: np.ndarray
    directions: frozenset = frozenset()
    id: str = ""

    @property
    def area(self) -> int:
        return int(self.mask.sum())

    @property
    def support(self) -> set:
        ys, xs = np.nonzero(self.mask)
        return {(int(x), int(y)) for x, y in zip(xs, ys)}

    @property
    def levels(self) -> np.ndarray:
        return self.values[self.mask]

    @property
    def bbox(self) -> tuple[int, int, int, int]:
        """(min_x, min_y, max_x, max_y), inclusive."""
        ys, xs = np.nonzero(self.mask)
        return int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max())

    @property
    def centroid(self) -> tuple[Fraction, Fraction]:
        ys, xs = np.nonzero(self.mask)
        n = len(xs)
        return Fraction(int(xs.sum()), n), Fraction(int(ys.sum()), n)

    @property
    def histogram(self) -> np.ndarray:
        return np.bincount(np.clip(self.levels, 0, 255), minlength=256)

    @property
    def depth(self) -> int:
        return int(self.levels.max()) if self.area else 0

    def label(self) -> str:
        if self.kind is ObjectKind.DALE:
            return "dale:" + "+".join(d.name for d in sorted(self.directions, key=lambda d: d.value))
        return self.kind.value

    def to_dict(self, include_support: bool = False) -> dict:
        cx, cy = self.centroid
        hist = self.histogram
        out = {
            "id": self.id,
            "kind": self.kind.value,
            "area": self.area,
            "bbox": list(self.bbox),
            "centroid": [str(cx), str(cy)],
            "histogram": {str(i): int(c) for i, c in enumerate(hist) if c},
        }
        if self.kind is ObjectKind.DALE:
            out["directions"] = sorted(d.name for d in self.directions)
        if include_support:
            out["support"] = sorted([x, y] for x, y in self.support)
        return out


def label8(mask: np.ndarray) -> tuple[np.ndarray, int]:
    return ndimage.label(mask, structure=EIGHT)


def _components(mask, values, kind, prefix="", directions=frozenset()) -> list[TopoObject]:
    labels, n = label8(mask)
    out = []
    for i in range(1, n + 1):
        m = labels == i
        out.append(TopoObject(kind, m, values, directions, f"{prefix}{len(out)}"))
    return out


def connected_components(two_phase: GrayImage, kind: ObjectKind = ObjectKind.OBJECT) -> list[TopoObject]:
    """Maximal 8-connected pieces of the object phase, in raster order of first pixel."""
    return _components(object_phase(two_phase), two_phase.levels, kind)


# ---------------------------------------------------------------------------
# waterfall

def _waterfall_update(nb, em, marked):
    if not marked:
        return nb.e5, False
    top = -1
    for n in (2, 4, 6, 8):
        if nb.in_bounds[n - 1] and not nb.marked[n - 1]:
            top = max(top, nb.e(n))
    if em <= top:
        return em, False
    return nb.e5, True


def waterfall_rule() -> CellFunction:
    """Mark-gated flooding: a marked element whose original level does not
    exceed its highest unmarked 4-neighbor takes the original level."""
    return CellFunction("waterfall", _waterfall_update, (K.WATERFALL, np.zeros((1, 1), np.int64)),
                        monotone_extensive=True, needs_reference=True)


def framed_canvas(shape, frame_level: int = HIGH) -> GrayImage:
    """Border ring at ``frame_level``, every inside element marked."""
    h, w = shape
    marks = np.zeros(shape, dtype=bool)
    marks[1:-1, 1:-1] = True
    return GrayImage(np.where(marks, 0, frame_level), marks)


def _check_original(original: GrayImage) -> None:
    if original.marks.any():
        raise DomainError("original image must be unmarked")
    if original.levels.min() < 0 or original.levels.max() > 255:
        raise DomainError("original levels must lie in [0, 255]")


def waterfall(marked: GrayImage, original: GrayImage, sched: Schedule = FORWARD_RASTER) -> GrayImage:
    """Flood from the unmarked elements of ``marked`` into the marked ones."""
    if marked.shape != original.shape:
        raise DomainError("dimension mismatch between working and original image")
    _check_original(original)
    out, _ = run_to_fixpoint(marked, waterfall_rule(), original, sched)
    return out


@dataclass(eq=False)
class HierarchyNode:
    depth: int
    object: TopoObject
    children: list = field(default_factory=list)

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "object": self.object.to_dict(),
            "children": [c.to_dict() for c in self.children],
        }


def depth_kind(depth: int) -> ObjectKind:
    if depth == 0:
        return ObjectKind.BACKGROUND
    if depth == 1:
        return ObjectKind.OBJECT
    return ObjectKind.LAKE if depth % 2 == 0 else ObjectKind.ISLAND


def waterfall_cascade(original: GrayImage, max_depth: int = 4,
                      sched: Schedule = FORWARD_RASTER) -> HierarchyNode:
    """Background, objects, lakes, islands by repeated flooding.

    Each round seeds every element valued so far with 256, inverts the
    working original, and floods the elements still marked.
    """
    _check_original(original)
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    ref = original
    res = waterfall(framed_canvas(original.shape), ref, sched)
    background = ~res.marks
    root = HierarchyNode(0, TopoObject(ObjectKind.BACKGROUND, background, original.levels, id="B0"))

    owner = np.full(original.shape, -1, dtype=np.int64)
    nodes = [root]
    owner[background] = 0
    remaining = res.marks
    depth = 1
    while depth < max_depth and remaining.any():
        ref = invert(ref)
        canvas = GrayImage(np.where(remaining, 0, HIGH), remaining)
        res = waterfall(canvas, ref, sched)
        flooded = remaining & ~res.marks
        kind = depth_kind(depth)
        prev_owner = owner.copy()
        for obj in _components(flooded, original.levels, kind, prefix=kind.value[0].upper() + f"{depth}."):
            parent = nodes[_parent_index(obj.mask, prev_owner)]
            node = HierarchyNode(depth, obj)
            parent.children.append(node)
            owner[obj.mask] = len(nodes)
            nodes.append(node)
        remaining = res.marks
        depth += 1
    return root


def _parent_index(mask: np.ndarray, owner: np.ndarray) -> int:
    """Node touching ``mask`` through the most 4-adjacent contacts."""
    ring = ndimage.binary_dilation(mask, structure=FOUR) & ~mask
    ids = owner[ring]
    ids = ids[ids >= 0]
    if ids.size == 0:
        return 0
    counts = np.bincount(ids)
    return int(np.argmax(counts))


# ---------------------------------------------------------------------------
# lakes and dales

def _lake_fill_update(nb, em, marked):
    if not all(nb.in_bounds):
        return nb.e5, marked
    m = max(em, min(nb.e(n) for n in (1, 2, 3, 4, 6, 7, 8, 9)))
    if m < nb.e5:
        return m, False
    return nb.e5, marked


def lake_fill_rule() -> CellFunction:
    """Lower each inside element toward max(original, lowest 8-neighbor).

    Started from 256 inside a frame holding the original border, the
    fixpoint is the original with every enclosed depression filled to its
    spill level.
    """
    return CellFunction("fill-lakes", _lake_fill_update, (K.RECONSTRUCT, np.zeros((1, 1), np.int64)),
                        needs_reference=True)


def fill_lakes(img: GrayImage, sched: Schedule = FORWARD_RASTER) -> GrayImage:
    _check_original(img)
    start = img.levels.copy()
    start[1:-1, 1:-1] = HIGH
    out, _ = run_to_fixpoint(GrayImage(start), lake_fill_rule(), img, sched)
    return out


def _gate(objs: list[TopoObject], gates: Gates) -> list[TopoObject]:
    return [o for o in objs if o.area >= gates.min_area and o.depth >= gates.min_depth]


def _renumber(objs, prefix):
    for i, o in enumerate(objs):
        o.id = f"{prefix}{i}"
    return objs


def lake_difference(img: GrayImage) -> GrayImage:
    return pointwise_subtract(fill_lakes(img), img)


def extract_lakes(img: GrayImage, gates: Gates = Gates()) -> list[TopoObject]:
    diff = lake_difference(img)
    objs = _components(diff.levels > 0, diff.levels, ObjectKind.LAKE)
    return _renumber(_gate(objs, gates), "L")


def dale_difference(img: GrayImage, open_direction: Direction,
                    lake_mask: Optional[np.ndarray] = None) -> GrayImage:
    """Directional fill minus original, with lake elements removed."""
    _check_original(img)
    diff = pointwise_subtract(fill_dales_and_lakes(img, open_direction), img).levels
    if lake_mask is None:
        lake_mask = lake_difference(img).levels > 0
    return GrayImage(np.where(lake_mask, 0, diff))


def extract_dales(img: GrayImage, open_direction: Direction, gates: Gates = Gates(),
                  lake_mask: Optional[np.ndarray] = None) -> list[TopoObject]:
    diff = dale_difference(img, open_direction, lake_mask).levels
    objs = _components(diff > 0, diff, ObjectKind.DALE, directions=frozenset({open_direction}))
    return _renumber(_gate(objs, gates), f"{open_direction.name}.")


def unflooded_support(img: GrayImage, sched: Schedule = FORWARD_RASTER) -> np.ndarray:
    """Elements left marked by one waterfall from a 256 frame."""
    return waterfall(framed_canvas(img.shape), img, sched).marks


def filled_object_support(img: GrayImage) -> np.ndarray:
    """Lake-filled pattern above the background level, inside the frame.

    The background level is the lowest level on the image border.
    """
    filled = fill_lakes(img).levels
    border = np.concatenate([img.levels[0], img.levels[-1], img.levels[:, 0], img.levels[:, -1]])
    out = filled > border.min()
    out[0, :] = out[-1, :] = False
    out[:, 0] = out[:, -1] = False
    return out
