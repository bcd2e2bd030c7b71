"""Image values, compact-support geometry, and 8-bit PNG I/O.

Images are 2-D float64 arrays with a nominal pixel range of [0, 255].
The measurement grid is twice the image size per axis (oversampling
factor 4); the signal occupies the top-left H x W corner of that grid
and the rest is the zero-padded region.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image


def as_image(arr) -> np.ndarray:
    """Validate and return a 2-D float64 image array."""
    img = np.asarray(arr, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"image must be 2-D, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite entries")
    return img


def pad_to_grid(img: np.ndarray) -> np.ndarray:
    """Embed an H x W image in the top-left corner of a zeroed 2H x 2W grid."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    grid = np.zeros((2 * h, 2 * w), dtype=np.float64)
    grid[:h, :w] = img
    return grid


def crop_support(grid: np.ndarray, h: int | None = None, w: int | None = None) -> np.ndarray:
    """Adjoint of :func:`pad_to_grid`: take the top-left H x W block."""
    grid = np.asarray(grid)
    gh, gw = grid.shape
    if h is None or w is None:
        if gh % 2 or gw % 2:
            raise ValueError(f"grid dims must be even to infer image size, got {grid.shape}")
        h, w = gh // 2, gw // 2
    if not (0 < h <= gh and 0 < w <= gw):
        raise ValueError(f"crop {h}x{w} does not fit grid {gh}x{gw}")
    return np.ascontiguousarray(grid[:h, :w]).astype(np.float64)


def default_support(h: int, w: int) -> np.ndarray:
    """Boolean mask on the 2H x 2W grid: True inside the signal block."""
    mask = np.zeros((2 * h, 2 * w), dtype=bool)
    mask[:h, :w] = True
    return mask


def quantize_u8(img: np.ndarray) -> np.ndarray:
    """Clamp to [0, 255] and round half-to-even to produce display pixels."""
    return np.rint(np.clip(img, 0.0, 255.0)).astype(np.uint8)


def save_png(path, img: np.ndarray) -> None:
    """Write an image as grayscale 8-bit PNG (clamped and rounded)."""
    Image.fromarray(quantize_u8(as_image(img)), mode="L").save(Path(path), format="PNG")


def load_png(path) -> np.ndarray:
    """Read a grayscale PNG as float64 in [0, 255].

    8-bit images are taken as-is; 16-bit images are rescaled linearly so
    65535 maps to 255. Color images are rejected.
    """
    with Image.open(Path(path)) as im:
        mode = im.mode
        if mode == "L":
            return np.asarray(im, dtype=np.float64)
        if mode in ("I;16", "I;16B", "I;16L"):
            return np.asarray(im, dtype=np.float64) / 257.0
        if mode == "I":
            data = np.asarray(im, dtype=np.float64)
            if data.max() > 255.0:  # 16-bit payload in a 32-bit container
                return data / 257.0
            return data
        raise ValueError(f"unsupported PNG mode {mode!r} (grayscale only): {path}")
