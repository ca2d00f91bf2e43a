"""ASCII grid and PGM reading/writing.

ASCII grid: a "W H" header line followed by H rows of W integers in
[-1, 256]; -1 marks an element. PGM (P2 or P5, maxval <= 255) carries levels
only; marks travel in an optional sidecar mark plane, an ASCII grid of 0/1.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .grid import GrayImage, LEVEL_MAX, LEVEL_MIN, MARK


class FormatError(ValueError):
    pass


def parse_grid(text: str) -> GrayImage:
    lines = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise FormatError("empty grid")
    try:
        header = [int(t) for t in lines[0]]
        if len(header) != 2:
            raise FormatError("header must be 'W H'")
        w, h = header
        if w <= 0 or h <= 0:
            raise FormatError("grid dimensions must be positive")
        rows = [[int(t) for t in ln] for ln in lines[1:]]
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"non-integer token: {exc}") from None
    if len(rows) != h:
        raise FormatError(f"expected {h} rows, found {len(rows)}")
    for i, r in enumerate(rows):
        if len(r) != w:
            raise FormatError(f"row {i}: expected {w} values, found {len(r)}")
    arr = np.array(rows, dtype=np.int32)
    if arr.min() < LEVEL_MIN or arr.max() > LEVEL_MAX:
        raise FormatError(f"values must lie in [{LEVEL_MIN}, {LEVEL_MAX}]")
    return GrayImage.from_external(arr)


def format_grid(img: GrayImage) -> str:
    ext = img.external()
    out = io.StringIO()
    out.write(f"{img.width} {img.height}\n")
    for row in ext:
        out.write(" ".join(str(int(v)) for v in row))
        out.write("\n")
    return out.getvalue()


def format_mask(mask: np.ndarray) -> str:
    h, w = mask.shape
    rows = "\n".join(" ".join("1" if v else "0" for v in row) for row in mask)
    return f"{w} {h}\n{rows}\n"


def parse_mask(text: str) -> np.ndarray:
    img = parse_grid(text)
    if img.marks.any() or not np.isin(img.levels, (0, 1)).all():
        raise FormatError("mark plane must contain only 0 and 1")
    return img.levels.astype(bool)


def _pgm_tokens(data: bytes, count: int, start: int = 0) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens: list[bytes] = []
    i = start
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i:i + 1].isspace():
            i += 1
        if i >= n:
            raise FormatError("truncated PGM header")
        if data[i:i + 1] == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < n and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
            j += 1
        tokens.append(data[i:j])
        i = j
    return tokens, i


def parse_pgm(data: bytes) -> GrayImage:
    try:
        (magic, w, h, maxval), pos = _pgm_tokens(data, 4)
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise FormatError("malformed PGM header") from None
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"unsupported magic {magic!r}")
    if w <= 0 or h <= 0 or not 0 < maxval <= 255:
        raise FormatError("PGM must be non-empty with maxval in [1, 255]")
    if magic == b"P5":
        body = data[pos + 1:pos + 1 + w * h]
        if len(body) != w * h:
            raise FormatError("truncated PGM raster")
        arr = np.frombuffer(body, dtype=np.uint8).reshape(h, w).astype(np.int32)
    else:
        try:
            vals = [int(t) for t in data[pos:].split()]
        except ValueError:
            raise FormatError("non-integer PGM sample") from None
        if len(vals) != w * h:
            raise FormatError(f"expected {w * h} samples, found {len(vals)}")
        arr = np.array(vals, dtype=np.int32).reshape(h, w)
    if arr.max() > maxval:
        raise FormatError("sample exceeds maxval")
    return GrayImage(arr)


def format_pgm(img: GrayImage, binary: bool = True) -> bytes:
    lv = img.levels
    if lv.min() < 0 or lv.max() > 255:
        raise FormatError("PGM export needs levels in [0, 255]")
    header = f"{'P5' if binary else 'P2'}\n{img.width} {img.height}\n255\n".encode()
    if binary:
        return header + lv.astype(np.uint8).tobytes()
    rows = "\n".join(" ".join(str(int(v)) for v in row) for row in lv)
    return header + rows.encode() + b"\n"


def _is_pgm(path: Path, data: bytes) -> bool:
    return path.suffix.lower() in (".pgm", ".pnm") or data[:2] in (b"P2", b"P5")


def mark_sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".marks")


def read_image(path) -> GrayImage:
    path = Path(path)
    data = path.read_bytes()
    if _is_pgm(path, data):
        img = parse_pgm(data)
        side = mark_sidecar(path)
        if side.exists():
            marks = parse_mask(side.read_text())
            if marks.shape != img.shape:
                raise FormatError("sidecar mark plane does not match image size")
            img = GrayImage(img.levels, marks)
        return img
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError:
        raise FormatError(f"{path}: not an ASCII grid or PGM") from None
    return parse_grid(text)


def write_image(img: GrayImage, path) -> None:
    path = Path(path)
    if path.suffix.lower() in (".pgm", ".pnm"):
        # Marked elements export as 0; the sidecar keeps the phase.
        lv = np.clip(img.levels, 0, 255)
        path.write_bytes(format_pgm(GrayImage(lv)))
        if img.marks.any():
            mark_sidecar(path).write_text(format_mask(img.marks))
        return
    path.write_text(format_grid(img))


__all__ = [
    "FormatError", "parse_grid", "format_grid", "format_mask", "parse_mask",
    "parse_pgm", "format_pgm", "read_image", "write_image", "MARK",
]
