"""Shared fixtures: deterministic natural crops and weight archives."""

from __future__ import annotations

import numpy as np
import pytest

import skimage.data as skd

from prforge.image import save_png

# Desk-scale natural 32x32 crops: (source, row, col, downscale). Offsets
# index the source photo; a downscale factor of f average-pools an
# (32f x 32f) region. The set mixes smooth-with-structure regions, where
# alpha = 3 noise limits HIO and ensembling/denoising have real signal to
# work with, and is frozen for reproducibility.
DESK_CROPS: tuple[tuple[str, int, int, int], ...] = (
    ("camera", 200, 100, 1),
    ("camera", 440, 210, 1),
    ("coins", 200, 300, 1),
    ("clock", 180, 120, 1),
    ("clock", 60, 180, 1),
    ("moon", 200, 120, 1),
    ("camera", 300, 120, 1),
    ("clock", 120, 100, 1),
    ("clock", 80, 250, 1),
    ("camera", 150, 300, 1),
)

_SOURCES = {}


def _source(name: str) -> np.ndarray:
    if name not in _SOURCES:
        _SOURCES[name] = getattr(skd, name)().astype(np.float64)
    return _SOURCES[name]


def natural_crop(spec, size: int = 32) -> np.ndarray:
    name, r, c = spec[:3]
    factor = spec[3] if len(spec) > 3 else 1
    span = size * factor
    region = _source(name)[r : r + span, c : c + span]
    if factor == 1:
        return region.copy()
    return region.reshape(size, factor, size, factor).mean(axis=(1, 3))


def desk_images(n: int = 10, size: int = 32) -> list[np.ndarray]:
    return [natural_crop(spec, size) for spec in DESK_CROPS[:n]]


@pytest.fixture(scope="session")
def desk_set() -> list[np.ndarray]:
    return desk_images()


@pytest.fixture()
def desk_dir(tmp_path):
    """Benchmark-style directory of desk PNGs."""
    d = tmp_path / "images"
    d.mkdir()
    for i, img in enumerate(desk_images()):
        save_png(d / f"desk{i:02d}.png", img)
    return d


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
