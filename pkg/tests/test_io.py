import numpy as np
import pytest

from helpers import fixture, fixture_names, random_image
from topoterrain.grid import GrayImage
from topoterrain.io import (
    FormatError,
    format_grid,
    format_mask,
    format_pgm,
    parse_grid,
    parse_mask,
    parse_pgm,
    read_image,
    write_image,
)


def test_parse_grid():
    img = parse_grid("3 2\n1 2 3\n-1 256 0\n")
    assert img.levels.tolist() == [[1, 2, 3], [0, 256, 0]]
    assert img.marks.tolist() == [[False, False, False], [True, False, False]]


def test_parse_grid_comments_and_blank_lines():
    assert parse_grid("# hi\n1 1\n\n5  # five\n") == GrayImage([[5]])


@pytest.mark.parametrize("text", [
    "", "2\n1 2\n", "2 1\n1\n", "1 2\n1\n", "1 1\nx\n", "1 1\n257\n", "1 1\n-2\n", "0 1\n",
])
def test_parse_grid_errors(text):
    with pytest.raises(FormatError):
        parse_grid(text)


@pytest.mark.parametrize("name", fixture_names())
def test_grid_roundtrip_fixtures(name):
    img = fixture(name)
    assert parse_grid(format_grid(img)) == img


def test_grid_roundtrip_marks():
    rng = np.random.default_rng(0)
    for _ in range(20):
        ext = rng.integers(-1, 257, (5, 7))
        img = GrayImage.from_external(ext)
        assert parse_grid(format_grid(img)) == img
        assert np.array_equal(img.external(), ext)


@pytest.mark.parametrize("binary", [True, False])
def test_pgm_roundtrip(binary):
    img = random_image(4, 9)
    assert parse_pgm(format_pgm(img, binary)) == img


def test_pgm_header_comments():
    data = b"P2\n# made by hand\n2 1\n# max\n255\n7 9\n"
    assert parse_pgm(data) == GrayImage([[7, 9]])


@pytest.mark.parametrize("data", [
    b"P6\n1 1\n255\n\x00", b"P5\n2 2\n255\n\x00", b"P2\n1 1\n9\n10\n", b"P2\n1 1\n", b"P2\n1 1\n300\n1\n",
])
def test_pgm_errors(data):
    with pytest.raises(FormatError):
        parse_pgm(data)


def test_pgm_rejects_out_of_range_export():
    with pytest.raises(FormatError):
        format_pgm(GrayImage([[256]]))


def test_file_roundtrip_both_formats(tmp_path):
    img = GrayImage.from_external([[-1, 3, 200], [255, 0, -1]])
    write_image(img, tmp_path / "a.grid")
    assert read_image(tmp_path / "a.grid") == img
    write_image(img, tmp_path / "a.pgm")
    assert (tmp_path / "a.pgm.marks").exists()
    back = read_image(tmp_path / "a.pgm")
    assert back == img
    assert read_image(tmp_path / "a.pgm") == back


def test_pgm_export_clips_stop_levels(tmp_path):
    write_image(GrayImage([[256, 4]]), tmp_path / "s.pgm")
    assert read_image(tmp_path / "s.pgm") == GrayImage([[255, 4]])


def test_mask_roundtrip():
    m = np.array([[True, False], [False, True]])
    assert np.array_equal(parse_mask(format_mask(m)), m)
    with pytest.raises(FormatError):
        parse_mask("1 1\n2\n")


def test_binary_garbage_is_rejected(tmp_path):
    p = tmp_path / "x.grid"
    p.write_bytes(b"\xff\xfe\x00")
    with pytest.raises(FormatError):
        read_image(p)
