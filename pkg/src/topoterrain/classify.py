"""Spatial relations, topographic signatures and the character table.

A glyph is described by its lakes, its dales and the way they sit relative
to each other. Relations are found with expansion fixpoints: an object is
above another when its downward expansion reaches it.
"""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy import ndimage

from .grid import CARDINALS, Direction, DomainError, GrayImage
from .features import (
    EIGHT,
    Gates,
    ObjectKind,
    TopoObject,
    dale_difference,
    extract_lakes,
)
from .ops import StopLine, convex_hull, expand, simple_fill

# A side of a dale is open when it holds at least this share of the open
# boundary of the best side.
OPEN_RATIO = 0.6
# A side of the glyph is flat when its simple-fill wedge spans this share of
# the glyph extent along that side.
FLAT_RATIO = 0.8
# A dale core smaller than this is a lone 3x3 block at a stroke joint.
MIN_CORE_AREA = 16
# Order in which cardinal labels are joined, e.g. "up+left".
_LABEL_ORDER = (Direction.D2, Direction.D8, Direction.D4, Direction.D6)


class RelationKind(enum.Enum):
    ABOVE = "above"
    BELOW = "below"
    LEFT_OF = "left-of"
    RIGHT_OF = "right-of"
    BETWEEN = "between"
    SIDE_BY_SIDE = "side-by-side"


_CONVERSE = {
    RelationKind.ABOVE: RelationKind.BELOW,
    RelationKind.BELOW: RelationKind.ABOVE,
    RelationKind.LEFT_OF: RelationKind.RIGHT_OF,
    RelationKind.RIGHT_OF: RelationKind.LEFT_OF,
    RelationKind.SIDE_BY_SIDE: RelationKind.SIDE_BY_SIDE,
}

# Relation of a to b when a's expansion toward d reaches b.
_SHADOW = {
    Direction.D8: RelationKind.ABOVE,
    Direction.D2: RelationKind.BELOW,
    Direction.D6: RelationKind.LEFT_OF,
    Direction.D4: RelationKind.RIGHT_OF,
}


@dataclass(frozen=True)
class Relation:
    """``subject kind object``; for BETWEEN the object is a pair of ids."""

    subject: str
    kind: RelationKind
    object: Union[str, tuple[str, str]]

    def converse(self) -> Relation:
        if self.kind is RelationKind.BETWEEN:
            a, b = self.object
            return Relation(self.subject, self.kind, (b, a))
        return Relation(self.object, _CONVERSE[self.kind], self.subject)

    def to_list(self) -> list:
        obj = list(self.object) if isinstance(self.object, tuple) else self.object
        return [self.subject, self.kind.value, obj]


def render(obj: TopoObject, shape) -> GrayImage:
    """The object's support as a gray pattern on a zero background."""
    if obj.mask.shape != tuple(shape):
        raise DomainError("object does not lie on this canvas")
    return GrayImage(np.where(obj.mask, np.maximum(obj.values, 1), 0))


def shadows(obj: TopoObject, shape) -> dict:
    """Expansion of the object toward each cardinal direction, as masks."""
    img = render(obj, shape)
    return {d: expand(img, d).levels > 0 for d in CARDINALS}


def _pair_relations(a_id, a_shadow, b_id, b_mask) -> list[Relation]:
    out = [Relation(a_id, kind, b_id) for d, kind in _SHADOW.items() if (a_shadow[d] & b_mask).any()]
    horizontal = {r.kind for r in out} & {RelationKind.LEFT_OF, RelationKind.RIGHT_OF}
    if horizontal:
        out.append(Relation(a_id, RelationKind.SIDE_BY_SIDE, b_id))
    return out


def relate(a: TopoObject, b: TopoObject, shape) -> list[Relation]:
    """Relations of ``a`` to ``b``.

    ABOVE(a, b) holds when a expanded down meets b, and likewise for the
    other three directions. SIDE_BY_SIDE holds when a horizontal expansion
    meets b, whatever the vertical ones do.
    """
    if (a.mask & b.mask).any():
        raise DomainError(f"objects {a.id!r} and {b.id!r} overlap")
    return _pair_relations(a.id, shadows(a, shape), b.id, b.mask)


def relate_all(objs: list[TopoObject], shape) -> list[Relation]:
    """Pairwise relations plus BETWEEN, for objects with distinct ids."""
    cast = {o.id: shadows(o, shape) for o in objs}
    rels = []
    for a in objs:
        for b in objs:
            if a is b:
                continue
            if (a.mask & b.mask).any():
                raise DomainError(f"objects {a.id!r} and {b.id!r} overlap")
            rels.extend(_pair_relations(a.id, cast[a.id], b.id, b.mask))
    have = set(rels)
    for x in objs:
        for a in objs:
            for b in objs:
                if len({a.id, b.id, x.id}) < 3 or a.id > b.id:
                    continue
                for k in (RelationKind.ABOVE, RelationKind.LEFT_OF):
                    fwd = Relation(a.id, k, x.id) in have and Relation(x.id, k, b.id) in have
                    bwd = Relation(b.id, k, x.id) in have and Relation(x.id, k, a.id) in have
                    if fwd or bwd:
                        rels.append(Relation(x.id, RelationKind.BETWEEN, (a.id, b.id)))
                        break
    return rels


# ---------------------------------------------------------------------------
# signatures

def opening_label(dirs) -> str:
    return "+".join(d.label for d in _LABEL_ORDER if d in dirs)


@dataclass(eq=False)
class Dale:
    object: TopoObject
    opening: frozenset
    small: bool = False

    @property
    def label(self) -> str:
        return opening_label(self.opening)


@dataclass(frozen=True)
class FeatureSignature:
    lake_count: int = 0
    dale_counts: tuple = ()          # sorted (opening label, count) pairs
    small_dale_flags: tuple = ()     # sorted labels of the small dales
    flat_sides: tuple = ()
    relations: tuple = ()            # sorted (subject label, kind, object label(s))
    objects: dict = field(default_factory=dict, compare=False, hash=False)
    id_relations: tuple = field(default=(), compare=False, hash=False)

    @property
    def dales(self) -> Counter:
        return Counter(dict(self.dale_counts))

    @property
    def dale_total(self) -> int:
        return sum(n for _, n in self.dale_counts)

    def is_empty(self) -> bool:
        return self.lake_count == 0 and not self.dale_counts and not self.flat_sides

    def to_dict(self) -> dict:
        return {
            "lake_count": self.lake_count,
            "dale_counts": dict(self.dale_counts),
            "small_dale_flags": list(self.small_dale_flags),
            "flat_sides": list(self.flat_sides),
            "objects": dict(self.objects),
            "relations": [r.to_list() for r in self.id_relations],
        }


def glyph_mask(img: GrayImage, gates: Gates = Gates()) -> np.ndarray:
    """Elements at or above the depth gate; lower ones count as background."""
    return img.levels >= gates.min_depth


def _bbox_area(mask: np.ndarray) -> int:
    ys, xs = np.nonzero(mask)
    if not len(xs):
        return 0
    return int((xs.max() - xs.min() + 1) * (ys.max() - ys.min() + 1))


def _raw_dales(img: GrayImage, gates: Gates, lake_mask: np.ndarray):
    """Cores of the directional dales, merged across directions.

    Only differences of at least the depth gate count, so low background
    noise never forms a dale. A core is what survives a 3x3 opening of that
    support: thin staircases along anti-aliased strokes do not hold a 3x3
    block. Two cores overlapping by half of the smaller one are the same
    physical dale; any smaller overlap goes to the larger dale.
    """
    somewhere = np.zeros(img.shape, dtype=bool)
    fill = np.zeros(img.shape, dtype=np.int64)
    found = []
    for d in Direction:
        diff = dale_difference(img, d, lake_mask).levels
        deep = diff >= gates.min_depth
        somewhere |= deep
        fill = np.maximum(fill, diff)
        core = ndimage.binary_opening(deep, structure=EIGHT)
        labels, n = ndimage.label(core, structure=EIGHT)
        for i in range(1, n + 1):
            m = labels == i
            if m.sum() >= max(gates.min_area, MIN_CORE_AREA):
                found.append((m, {d}))
    groups: list = []
    for m, dirs in found:
        m, dirs = m.copy(), set(dirs)
        for i in reversed(range(len(groups))):
            gm, gd = groups[i]
            if (gm & m).sum() * 2 >= min(gm.sum(), m.sum()):
                m |= gm
                dirs |= gd
                del groups[i]
        groups.append((m, dirs))
    groups.sort(key=lambda g: -int(g[0].sum()))
    taken = np.zeros(img.shape, dtype=bool)
    out = []
    for m, dirs in groups:
        m = m & ~taken
        taken |= m
        out.append((m, dirs))
    return out, somewhere, fill


def _opening(img: GrayImage, mask, somewhere, lake_mask, fill) -> frozenset:
    """Cardinal sides through which the dale reaches lower ground.

    A boundary element p of the dale is open toward d when its neighbor q
    that way is off the image, or lies outside every dale and lake and is
    lower than p's filled level.
    """
    lv = img.levels
    h, w = lv.shape
    surface = lv + fill
    closed = somewhere | lake_mask
    counts = {}
    ys, xs = np.nonzero(mask)
    for d in CARDINALS:
        dx, dy = d.offset
        qy, qx = ys + dy, xs + dx
        off = (qy < 0) | (qy >= h) | (qx < 0) | (qx >= w)
        cy, cx = np.clip(qy, 0, h - 1), np.clip(qx, 0, w - 1)
        low = ~closed[cy, cx] & (lv[cy, cx] < surface[ys, xs])
        counts[d] = int((off | low).sum())
    best = max(counts.values())
    if best == 0:
        return frozenset()
    return frozenset(d for d, c in counts.items() if c >= OPEN_RATIO * best)


def flat_sides(img: GrayImage, gates: Gates = Gates()) -> tuple:
    """Sides of the glyph with a long straight edge.

    The simple fill spreads a straight edge into a wedge; the part of the
    wedge outside the convex hull measures how straight that side is.
    """
    glyph = glyph_mask(img, gates)
    if not glyph.any():
        return ()
    ys, xs = np.nonzero(glyph)
    hull = convex_hull(img).levels
    out = []
    for side in CARDINALS:
        # The fill reading from `side` pushes the edge facing the other way.
        wedge = (simple_fill(img, side).levels - hull) >= gates.min_depth
        if side in (Direction.D4, Direction.D6):
            base, extent = wedge.sum(axis=0).max(), ys.max() - ys.min() + 1
        else:
            base, extent = wedge.sum(axis=1).max(), xs.max() - xs.min() + 1
        if base >= FLAT_RATIO * extent:
            out.append(side.opposite.label)
    return tuple(sorted(out))


def extract_features(img: GrayImage, gates: Gates = Gates()):
    """Lakes and merged dales of a single glyph."""
    lakes = extract_lakes(img, gates)
    # Only gated lakes are cut out of the dales; shallow pits in a noisy
    # background would otherwise punch holes in them.
    lake_mask = np.zeros(img.shape, dtype=bool)
    for o in lakes:
        lake_mask |= o.mask
    groups, somewhere, fill = _raw_dales(img, gates, lake_mask)
    dales = []
    for i, (m, dirs) in enumerate(groups):
        obj = TopoObject(ObjectKind.DALE, m, fill, frozenset(dirs), f"d{i}")
        dales.append(Dale(obj, _opening(img, m, somewhere, lake_mask, fill)))
    box = _bbox_area(glyph_mask(img, gates))
    biggest = max((d.object.area for d in dales), default=0)
    for d in dales:
        a = d.object.area
        d.small = a < gates.small_fraction * box or a < gates.small_relative * biggest
    return lakes, dales


def signature(img: GrayImage, gates: Gates = Gates()) -> FeatureSignature:
    if img.marks.any():
        raise DomainError("signature needs an unmarked gray image")
    if not glyph_mask(img, gates).any():
        return FeatureSignature()
    lakes, dales = extract_features(img, gates)
    labels = {o.id: "lake" for o in lakes}
    labels.update({d.object.id: d.label for d in dales})
    objs = lakes + [d.object for d in dales]
    rels = relate_all(objs, img.shape)

    def named(r):
        if isinstance(r.object, tuple):
            obj = tuple(sorted(labels[i] for i in r.object))
        else:
            obj = labels[r.object]
        return (labels[r.subject], r.kind.value, obj)

    return FeatureSignature(
        lake_count=len(lakes),
        dale_counts=tuple(sorted(Counter(d.label for d in dales).items())),
        small_dale_flags=tuple(sorted(d.label for d in dales if d.small)),
        flat_sides=flat_sides(img, gates),
        relations=tuple(sorted(set(named(r) for r in rels), key=repr)),
        objects=labels,
        id_relations=tuple(rels),
    )


# ---------------------------------------------------------------------------
# the table

def _norm_label(text: str) -> str:
    dirs = {Direction.parse(t) for t in text.split("+")}
    if any(not d.is_cardinal for d in dirs):
        raise ValueError(f"dale labels use cardinal directions only: {text!r}")
    return opening_label(dirs)


def _norm_ref(text: str) -> str:
    return text if text == "lake" else _norm_label(text)


@dataclass(frozen=True)
class Template:
    """One table row. ``None`` fields are wildcards.

    ``small`` is an exact count, or a string "N+" for "at least N".
    """

    lakes: Optional[int] = None
    dales: Optional[tuple] = None
    small: Optional[Union[int, str]] = None
    flat: Optional[tuple] = None
    relations: tuple = ()
    note: str = ""

    @classmethod
    def from_dict(cls, d: dict) -> Template:
        dales = d.get("dales")
        flat = d.get("flat")
        rels = []
        for s, k, o in d.get("relations", ()):
            kind = RelationKind(k)
            o = tuple(sorted(_norm_ref(t) for t in o)) if isinstance(o, list) else _norm_ref(o)
            rels.append((_norm_ref(s), kind.value, o))
        small = d.get("small")
        if isinstance(small, str) and not (small.endswith("+") and small[:-1].isdigit()):
            raise ValueError(f"bad small-dale count {small!r}")
        return cls(
            lakes=d.get("lakes"),
            dales=None if dales is None else tuple(sorted(_norm_label(t) for t in dales)),
            small=small,
            flat=None if flat is None else tuple(sorted(Direction.parse(t).label for t in flat)),
            relations=tuple(rels),
            note=d.get("note", ""),
        )

    def to_dict(self) -> dict:
        out = {"lakes": self.lakes, "dales": None if self.dales is None else list(self.dales),
               "small": self.small, "flat": None if self.flat is None else list(self.flat),
               "relations": [[s, k, list(o) if isinstance(o, tuple) else o] for s, k, o in self.relations]}
        if self.note:
            out["note"] = self.note
        return out

    def admits(self, sig: FeatureSignature) -> bool:
        """Lake and dale totals must agree for a row to be a candidate."""
        if self.lakes is not None and self.lakes != sig.lake_count:
            return False
        if self.dales is not None and len(self.dales) != sig.dale_total:
            return False
        return True

    def field_score(self, sig: FeatureSignature) -> int:
        score = 0
        score += self.lakes is None or self.lakes == sig.lake_count
        score += self.dales is None or Counter(self.dales) == sig.dales
        n_small = len(sig.small_dale_flags)
        if self.small is None:
            score += 1
        elif isinstance(self.small, str):
            score += n_small >= int(self.small[:-1])
        else:
            score += n_small == self.small
        score += self.flat is None or self.flat == sig.flat_sides
        return int(score)

    def relation_score(self, sig: FeatureSignature) -> int:
        have = set(sig.relations)
        hit = sum(1 for r in self.relations if r in have)
        return hit - (len(self.relations) - hit)


@dataclass(frozen=True)
class SignatureTable:
    rows: dict

    @classmethod
    def from_dict(cls, d: dict) -> SignatureTable:
        rows = {str(k): Template.from_dict(v) for k, v in d["rows"].items()}
        if not rows:
            raise ValueError("empty signature table")
        return cls(rows)

    @classmethod
    def load(cls, path: Union[str, Path, None] = None) -> SignatureTable:
        if path is None:
            text = resources.files("topoterrain").joinpath("data/table.json").read_text()
        else:
            text = Path(path).read_text()
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {"schema": "topoterrain/1", "rows": {k: v.to_dict() for k, v in self.rows.items()}}

    def extended(self, char: str, template: Template) -> SignatureTable:
        return SignatureTable({**self.rows, char: template})


def classify(sig: FeatureSignature, table: Optional[SignatureTable] = None) -> list[tuple[str, int]]:
    """Rank candidate characters, best first.

    Rows must agree on the lake count and the number of dales. Each agreeing
    field then scores one point (wildcards score free); relation matches net
    of missing relations break ties, then character order. The returned
    score is the field score. A blank glyph only matches rows with no lakes
    and no dales.
    """
    table = table or SignatureTable.load()
    if not table.rows:
        raise ValueError("empty signature table")
    scored = []
    for ch, row in table.rows.items():
        if not row.admits(sig):
            continue
        scored.append((-row.field_score(sig), -row.relation_score(sig), ch))
    scored.sort()
    return [(ch, -fs) for fs, _, ch in scored]


def rank_details(sig: FeatureSignature, table: SignatureTable) -> list[dict]:
    out = []
    for ch, score in classify(sig, table):
        out.append({"character": ch, "score": score,
                    "relation_score": table.rows[ch].relation_score(sig)})
    return out


# ---------------------------------------------------------------------------
# decomposition

def binarize(img: GrayImage, key: np.ndarray, keep_positive: bool = True) -> GrayImage:
    """Keep ``img`` where ``key > 0`` (or where it is 0); mark the rest."""
    keep = (np.asarray(key) > 0) == keep_positive
    keep &= ~img.marks
    return GrayImage(np.where(keep, img.levels, 0), ~keep)


def decompose(original: GrayImage, lake: TopoObject, toward: Direction,
              stops: Optional[StopLine] = None) -> GrayImage:
    """Part of the glyph swept by the lake's expansion toward ``toward``.

    The pattern is kept where the expanded lake is positive and the lake
    itself is not, and only where the original has a positive level. The
    rest is the marked background phase.
    """
    if not lake.mask.any():
        raise DomainError("lake support is empty")
    stops = stops or StopLine.empty()
    swept = expand(render(lake, original.shape), toward, stops).levels
    swept = np.where(stops.mask(original.shape), 0, swept)
    out = binarize(original, swept, keep_positive=True)
    out = binarize(out, lake.mask, keep_positive=False)
    return binarize(out, original.levels, keep_positive=True)
