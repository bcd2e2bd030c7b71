"""Dihedral-group transforms: the 8 symmetries of the square.

Every element is realized as a pure index permutation (no interpolation),
so applying a transform and then its inverse restores an image exactly.
Each element decomposes canonically as

    x' = maybe_transpose( maybe_flip_rows( maybe_flip_cols( x ) ) )

which is also how the matching Fourier-magnitude permutations are built
(see :mod:`prforge.tta`).
"""

from __future__ import annotations

from enum import Enum

import numpy as np


class D4(Enum):
    R0 = "R0"
    R90 = "R90"
    R180 = "R180"
    R270 = "R270"
    HF = "HF"  # horizontal flip (reverse columns)
    VF = "VF"  # vertical flip (reverse rows)
    DF = "DF"  # main-diagonal flip (transpose)
    ADF = "ADF"  # anti-diagonal flip


# element -> (transpose, flip_rows, flip_cols)
_DECOMP: dict[D4, tuple[bool, bool, bool]] = {
    D4.R0: (False, False, False),
    D4.HF: (False, False, True),
    D4.VF: (False, True, False),
    D4.R180: (False, True, True),
    D4.DF: (True, False, False),
    D4.R90: (True, False, True),
    D4.R270: (True, True, False),
    D4.ADF: (True, True, True),
}

ALL_TRANSFORMS: tuple[D4, ...] = tuple(_DECOMP)
FLIP_TRANSFORMS: tuple[D4, ...] = (D4.R0, D4.R180)

_SQUARE_ONLY = frozenset({D4.R90, D4.R270, D4.DF, D4.ADF})


def requires_square(t: D4) -> bool:
    return t in _SQUARE_ONLY


def apply_d4(img: np.ndarray, t: D4) -> np.ndarray:
    """Apply one dihedral transform to a 2-D array by index permutation."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {img.shape}")
    transpose, flip_rows, flip_cols = _DECOMP[t]
    if transpose and img.shape[0] != img.shape[1]:
        raise ValueError(
            f"{t.value} requires a square image, got {img.shape[0]}x{img.shape[1]}"
        )
    out = img
    if flip_cols:
        out = out[:, ::-1]
    if flip_rows:
        out = out[::-1, :]
    if transpose:
        out = out.T
    return np.ascontiguousarray(out)


def inverse_d4(t: D4) -> D4:
    """Group inverse. Flips are involutions; with a transpose the two flip
    flags swap roles."""
    transpose, flip_rows, flip_cols = _DECOMP[t]
    if transpose:
        key = (True, flip_cols, flip_rows)
    else:
        key = (transpose, flip_rows, flip_cols)
    for elem, decomp in _DECOMP.items():
        if decomp == key:
            return elem
    raise AssertionError("unreachable: D4 is closed under inversion")


def align_conjugate_orientation(images: list[np.ndarray], max_shift: int = 2) -> list[np.ndarray]:
    """Gauge-fix the trivial ambiguities across an ensemble.

    Fourier magnitudes cannot distinguish an image from its 180-degree
    rotation or from small in-support translations, so independent
    reconstructions come back in mixed gauges; averaging a mixed ensemble
    smears it. Each image is mapped by the candidate (flip, cyclic shift)
    that brings it strictly closest to the first one. The identity always
    competes, so an image is only moved when that genuinely improves the
    match.
    """
    if len(images) <= 1:
        return list(images)
    ref = np.asarray(images[0])
    shifts = range(-max_shift, max_shift + 1)
    out = [ref]
    for img in images[1:]:
        img = np.asarray(img)
        best = img
        best_d = np.sum((img - ref) ** 2)
        for base in (img, apply_d4(img, D4.R180)):
            for dr in shifts:
                for dc in shifts:
                    cand = np.roll(base, (dr, dc), axis=(0, 1))
                    d = np.sum((cand - ref) ** 2)
                    if d < best_d:
                        best, best_d = cand, d
        out.append(best)
    return out
