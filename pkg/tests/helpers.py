"""Fixture loading and seeded random images shared by the tests."""

from pathlib import Path

import numpy as np

from topoterrain.grid import GrayImage
from topoterrain.io import read_image

FIXTURES = Path(__file__).resolve().parent / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"

GLYPHS = "ADHIJKLMNOPQRSTUVWXYZ"

# criterion number -> PASS/FAIL line, filled by test_acceptance
ACCEPTANCE: dict = {}


def fixture(name: str) -> GrayImage:
    return read_image(FIXTURES / f"{name}.grid")


def fixture_names() -> list[str]:
    return sorted(p.stem for p in FIXTURES.glob("*.grid"))


def glyph(ch: str) -> GrayImage:
    return fixture(f"glyph_{ch}")


def random_image(seed: int, size: int = 16) -> GrayImage:
    """One of three textures chosen by seed: white noise, a few plateaus,
    or smooth blobs."""
    rng = np.random.default_rng(seed)
    kind = seed % 3
    if kind == 0:
        a = rng.integers(0, 256, (size, size))
    elif kind == 1:
        a = rng.choice([0, 60, 140, 255], size=(size, size), p=[0.4, 0.2, 0.2, 0.2])
    else:
        coarse = rng.integers(0, 256, (size // 4 + 1, size // 4 + 1))
        a = np.kron(coarse, np.ones((4, 4), dtype=np.int64))[:size, :size]
        a = np.clip(a + rng.integers(-20, 21, a.shape), 0, 255)
    return GrayImage(a)


def random_images(n: int = 100, size: int = 16, base: int = 0) -> list[GrayImage]:
    return [random_image(base + i, size) for i in range(n)]
