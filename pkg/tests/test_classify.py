import json

import numpy as np
import pytest

import oracles
from helpers import GLYPHS, glyph
from topoterrain.classify import (
    FeatureSignature,
    Relation,
    RelationKind,
    SignatureTable,
    Template,
    binarize,
    classify,
    decompose,
    extract_features,
    flat_sides,
    rank_details,
    relate,
    relate_all,
    render,
    signature,
)
from topoterrain.features import ObjectKind, TopoObject, extract_dales, extract_lakes
from topoterrain.grid import Direction, DomainError, GrayImage
from topoterrain.ops import StopLine

SHAPE = (16, 16)


def obj(mask, oid):
    return TopoObject(ObjectKind.DALE, mask, np.full(mask.shape, 50), id=oid)


def pixel(x, y, oid, shape=SHAPE):
    m = np.zeros(shape, dtype=bool)
    m[y, x] = True
    return obj(m, oid)


def kinds(rels):
    return {(r.subject, r.kind, r.object) for r in rels}


# --- relations

def test_single_pixels_one_above_the_other():
    a, b = pixel(3, 2, "a"), pixel(3, 9, "b")
    assert kinds(relate(a, b, SHAPE)) == {("a", RelationKind.ABOVE, "b")}
    assert kinds(relate(b, a, SHAPE)) == {("b", RelationKind.BELOW, "a")}


def test_side_by_side_pixels():
    a, b = pixel(2, 5, "a"), pixel(9, 5, "b")
    assert kinds(relate(a, b, SHAPE)) == {("a", RelationKind.LEFT_OF, "b"), ("a", RelationKind.SIDE_BY_SIDE, "b")}


def test_relate_rejects_overlap():
    with pytest.raises(DomainError):
        relate(pixel(1, 1, "a"), pixel(1, 1, "b"), SHAPE)
    with pytest.raises(DomainError):
        render(pixel(1, 1, "a"), (4, 4))


def test_relation_converse_invariants_on_random_pairs():
    rng = np.random.default_rng(3)
    for _ in range(60):
        labels = rng.integers(0, 3, SHAPE)
        a = obj(labels == 1, "a")
        b = obj(labels == 2, "b")
        if not a.area or not b.area:
            continue
        ab, ba = set(relate(a, b, SHAPE)), set(relate(b, a, SHAPE))
        assert {r.converse() for r in ab} == ba
        for r in ab:
            if r.kind is RelationKind.SIDE_BY_SIDE:
                assert Relation("b", r.kind, "a") in ba


def test_between():
    objs = [pixel(2, 8, "l"), pixel(7, 8, "m"), pixel(12, 8, "r"), pixel(7, 1, "top")]
    rels = relate_all(objs, SHAPE)
    between = [r for r in rels if r.kind is RelationKind.BETWEEN]
    assert [r.subject for r in between] == ["m"]
    assert set(between[0].object) == {"l", "r"}
    assert between[0].to_list()[:2] == ["m", "between"]


# --- signatures

def test_a_lake_above_dale_opened_down():
    a = glyph("A")
    lakes = extract_lakes(a)
    dales = extract_dales(a, Direction.D8)
    assert len(lakes) == 1 and len(dales) == 1
    rels = relate(lakes[0], dales[0], a.shape)
    assert Relation(lakes[0].id, RelationKind.ABOVE, dales[0].id) in rels
    assert ("lake", "above", "down") in signature(a).relations


def test_o_one_lake_no_dales():
    s = signature(glyph("O"))
    assert s.lake_count == 1 and s.dale_counts == ()


def test_blank_signature_is_empty():
    s = signature(GrayImage.zeros(32, 32))
    assert s == FeatureSignature() and s.is_empty()
    assert classify(s) == []


def test_blank_matches_a_no_feature_row():
    table = SignatureTable.load().extended("-", Template(lakes=0, dales=()))
    assert [ch for ch, _ in classify(signature(GrayImage.zeros(32, 32)), table)] == ["-"]


def test_signature_rejects_marked_input():
    with pytest.raises(DomainError):
        signature(GrayImage([[1, 2]], [[True, False]]))


def test_s_and_z_directions_are_contrary():
    s, z = signature(glyph("S")), signature(glyph("Z"))
    assert ("right", "above", "left") in s.relations
    assert ("left", "above", "right") in z.relations
    assert ("left", "above", "right") not in s.relations
    assert ("right", "above", "left") not in z.relations


def test_n_dales_side_by_side_h_dales_stacked():
    n, h = signature(glyph("N")), signature(glyph("H"))
    assert ("up", "side-by-side", "down") in n.relations
    assert ("up", "above", "down") in h.relations
    assert not any(r[1] == "side-by-side" for r in h.relations)


def test_merged_dale_directions():
    assert signature(glyph("J")).dale_counts == (("up+left", 1),)
    assert signature(glyph("L")).dale_counts == (("up+right", 1),)
    assert dict(signature(glyph("T")).dale_counts) == {"down+left": 1, "down+right": 1}


def test_v_small_dales_against_u():
    v, u = signature(glyph("V")), signature(glyph("U"))
    assert u.dale_counts == (("up", 1),) and u.small_dale_flags == ()
    assert v.small_dale_flags == ("left", "right")
    assert dict(v.dale_counts)["up"] == 1


def test_m_and_w_between():
    assert ("up", "between", ("down", "down")) in signature(glyph("M")).relations
    assert ("down", "between", ("up", "up")) in signature(glyph("W")).relations


def test_flat_sides():
    assert flat_sides(glyph("D")) == ("left",)
    assert flat_sides(glyph("O")) == ()


def test_dales_are_disjoint_from_lakes_and_each_other():
    for ch in GLYPHS:
        img = glyph(ch)
        lakes, dales = extract_features(img)
        seen = np.zeros(img.shape, dtype=int)
        for o in lakes + [d.object for d in dales]:
            seen += o.mask
        assert seen.max() <= 1, ch


def test_signature_serialization():
    d = signature(glyph("P")).to_dict()
    assert d["lake_count"] == 1
    assert d["dale_counts"] == {"down+right": 1}
    json.dumps(d)


# --- the table and ranking

def test_shipped_table_rows():
    table = SignatureTable.load()
    assert set("IJKLMNOPQRSTUVWXYZ") <= set(table.rows)
    assert table.rows["O"].lakes == 1 and table.rows["O"].dales == ()
    assert table.rows["Q"].small == "1+"


def test_table_roundtrip(tmp_path):
    table = SignatureTable.load()
    p = tmp_path / "t.json"
    p.write_text(json.dumps(table.to_dict()))
    assert SignatureTable.load(p) == table


@pytest.mark.parametrize("row", [
    {"dales": ["up-left"]}, {"small": "many"}, {"relations": [["lake", "near", "up"]]},
])
def test_bad_table_rows(row):
    with pytest.raises(ValueError):
        SignatureTable.from_dict({"rows": {"?": row}})


def test_empty_table():
    with pytest.raises(ValueError):
        SignatureTable.from_dict({"rows": {}})


@pytest.mark.parametrize("ch", GLYPHS)
def test_true_character_ranks_first(ch):
    ranking = classify(signature(glyph(ch)))
    assert ranking[0][0] == ch, ranking[:3]


@pytest.mark.parametrize("a,b", [("O", "D"), ("U", "V"), ("H", "N"), ("S", "Z")])
def test_contrasts(a, b):
    for x, y in ((a, b), (b, a)):
        order = [ch for ch, _ in classify(signature(glyph(x)))]
        assert order.index(x) < order.index(y) if y in order else order[0] == x


def test_ties_break_by_character():
    sig = signature(glyph("O"))
    table = SignatureTable.load().extended("0", SignatureTable.load().rows["O"])
    assert [ch for ch, _ in classify(sig, table)][:2] == ["0", "O"]


def test_rank_details():
    det = rank_details(signature(glyph("S")), SignatureTable.load())
    assert det[0] == {"character": "S", "score": 4, "relation_score": 1}
    z = next(d for d in det if d["character"] == "Z")
    assert z["relation_score"] == -1


# --- decomposition

def expected_part(original, lake, toward, stops=StopLine.empty()):
    swept = oracles.expand_prefix(stops.apply(render(lake, original.shape)).levels, toward.value)
    swept[stops.mask(original.shape)] = 0
    return (swept > 0) & ~lake.mask & (original.levels > 0)


def test_decompose_a_middle_part():
    a = glyph("A")
    (lake,) = extract_lakes(a)
    part = decompose(a, lake, Direction.D8)
    keep = ~part.marks
    assert np.array_equal(keep, expected_part(a, lake, Direction.D8))
    assert keep.any()
    assert (a.levels[keep] > 0).all()
    assert np.array_equal(part.levels[keep], a.levels[keep])
    assert part.external()[~keep].tolist() == [-1] * int((~keep).sum())
    # Under the lake and within its columns.
    ys, xs = np.nonzero(keep)
    _, _, _, lake_bottom = lake.bbox
    lx0, _, lx1, _ = lake.bbox
    assert ys.min() > lake.bbox[1] and lx0 <= xs.min() and xs.max() <= lx1
    assert (ys > lake_bottom).any()


def test_decompose_a_upper_part():
    a = glyph("A")
    (lake,) = extract_lakes(a)
    part = decompose(a, lake, Direction.D2)
    keep = ~part.marks
    assert np.array_equal(keep, expected_part(a, lake, Direction.D2))
    assert np.nonzero(keep)[0].max() < lake.bbox[3]


def test_decompose_stopped_right_below():
    a = glyph("A")
    (lake,) = extract_lakes(a)
    _, _, _, bottom = lake.bbox
    stops = StopLine.row(bottom + 1, a.width)
    part = decompose(a, lake, Direction.D8, stops)
    assert np.array_equal(~part.marks, expected_part(a, lake, Direction.D8, stops))
    assert not (~part.marks)[bottom + 1:].any()


def test_decompose_empty_lake():
    with pytest.raises(DomainError):
        decompose(glyph("A"), obj(np.zeros((32, 32), dtype=bool), "x"), Direction.D8)


def test_binarizations_commute():
    a = glyph("A")
    (lake,) = extract_lakes(a)
    swept = oracles.expand_prefix(render(lake, a.shape).levels, 8)
    one = binarize(binarize(a, swept), lake.mask, keep_positive=False)
    two = binarize(binarize(a, lake.mask, keep_positive=False), swept)
    assert one == two
