"""Oversampled unitary Fourier measurement operator and noise simulation.

The operator maps an H x W real image to the unitary 2-D DFT of its
zero-padded 2H x 2W embedding, so its columns are orthonormal and the
pseudoinverse is crop(real(inverse DFT)). Intensity noise follows
w_i ~ Normal(0, alpha^2 |Ax|_i^2) per measurement bin.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .image import as_image, crop_support, pad_to_grid

PRM1_MAGIC = b"PRM1\x00\x00\x00\x00"


class MeasurementFormatError(ValueError):
    """Raised when a PRM1 file is malformed."""


@dataclass(frozen=True)
class Measurement:
    """Oversampled Fourier-magnitude data for one image.

    ``intensities`` holds raw y^2 values (small negatives allowed under
    noise); ``magnitudes`` is sqrt(max(intensities, 0)). Both are 2H x 2W
    row-major grids.
    """

    intensities: np.ndarray
    magnitudes: np.ndarray
    alpha: float
    dims: tuple[int, int]
    seed: int | None = None

    def __post_init__(self):
        h, w = self.dims
        expect = (2 * h, 2 * w)
        if self.intensities.shape != expect or self.magnitudes.shape != expect:
            raise ValueError(
                f"measurement grids must be {expect}, got {self.intensities.shape} / {self.magnitudes.shape}"
            )
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")

    @classmethod
    def from_intensities(
        cls, intensities: np.ndarray, alpha: float, dims: tuple[int, int], seed: int | None = None
    ) -> "Measurement":
        intensities = np.asarray(intensities, dtype=np.float64)
        magnitudes = np.sqrt(np.maximum(intensities, 0.0))
        return cls(intensities=intensities, magnitudes=magnitudes, alpha=float(alpha), dims=dims, seed=seed)

    def with_grids(self, intensities: np.ndarray, magnitudes: np.ndarray) -> "Measurement":
        return replace(self, intensities=intensities, magnitudes=magnitudes)


@dataclass(frozen=True)
class FourierOp:
    """Unitary oversampled DFT on a 2x-per-axis padded grid."""

    inner_h: int
    inner_w: int

    def __post_init__(self):
        if self.inner_h < 1 or self.inner_w < 1:
            raise ValueError("image dims must be positive")

    @property
    def outer_h(self) -> int:
        return 2 * self.inner_h

    @property
    def outer_w(self) -> int:
        return 2 * self.inner_w

    @classmethod
    def for_image(cls, img: np.ndarray) -> "FourierOp":
        img = np.asarray(img)
        return cls(img.shape[0], img.shape[1])

    def _check_inner(self, img: np.ndarray) -> np.ndarray:
        img = as_image(img)
        if img.shape != (self.inner_h, self.inner_w):
            raise ValueError(f"image dims {img.shape} do not match operator {self.inner_h}x{self.inner_w}")
        return img

    def apply(self, img: np.ndarray) -> np.ndarray:
        """Forward map A: zero-pad then unitary 2-D DFT. Norm-preserving."""
        return np.fft.fft2(pad_to_grid(self._check_inner(img)), norm="ortho")

    def apply_grid(self, grid: np.ndarray) -> np.ndarray:
        """Unitary DFT of a full 2H x 2W grid (no padding step)."""
        if grid.shape != (self.outer_h, self.outer_w):
            raise ValueError(f"grid dims {grid.shape} do not match {self.outer_h}x{self.outer_w}")
        return np.fft.fft2(grid, norm="ortho")

    def pseudoinverse(self, field: np.ndarray) -> np.ndarray:
        """A-dagger: real part of the unitary inverse DFT, cropped to H x W."""
        return crop_support(self.pseudoinverse_grid(field), self.inner_h, self.inner_w)

    def pseudoinverse_grid(self, field: np.ndarray) -> np.ndarray:
        field = np.asarray(field)
        if field.shape != (self.outer_h, self.outer_w):
            raise ValueError(f"field dims {field.shape} do not match {self.outer_h}x{self.outer_w}")
        return np.fft.ifft2(field, norm="ortho").real

    def simulate(self, img: np.ndarray, alpha: float, rng: np.random.Generator | None = None,
                 seed: int | None = None) -> Measurement:
        """Draw a noisy measurement: y^2 = |Ax|^2 + w, w_i ~ N(0, alpha^2 |Ax|_i^2).

        ``rng`` is the caller-owned stream (may be None when alpha == 0);
        ``seed`` is recorded as provenance only.
        """
        if alpha < 0:
            raise ValueError("alpha must be non-negative")
        clean = np.abs(self.apply(img)) ** 2
        if alpha == 0:
            noisy = clean
        else:
            if rng is None:
                raise ValueError("an rng is required when alpha > 0")
            noisy = clean + alpha * np.sqrt(clean) * rng.standard_normal(clean.shape)
        return Measurement.from_intensities(noisy, alpha, (self.inner_h, self.inner_w), seed=seed)

    def snr_db(self, img: np.ndarray, meas: Measurement) -> float:
        """Reported SNR: 10*log10(||Fx||_2 / ||y^2 - |Fx|^2||_2), +inf if exact."""
        field = self.apply(img)
        num = float(np.linalg.norm(field.ravel()))
        den = float(np.linalg.norm((meas.intensities - np.abs(field) ** 2).ravel()))
        if den == 0.0:
            return math.inf
        return 10.0 * math.log10(num / den)

    def residual(self, img: np.ndarray, meas: Measurement) -> float:
        """Data-fidelity score ||y - |Ax|||_2^2."""
        diff = meas.magnitudes - np.abs(self.apply(img))
        return float(np.sum(diff * diff))

    def residual_gradient(self, img: np.ndarray, meas: Measurement) -> np.ndarray:
        """(Sub-)gradient of the residual: 2 (x - A^dagger(phase(Ax) * y))."""
        from .hio import measurement_projection  # local import to avoid a cycle

        return 2.0 * (self._check_inner(img) - measurement_projection(img, meas.magnitudes))


def save_prm(meas: Measurement, path) -> None:
    """Write the PRM1 container: magic, length-prefixed JSON header, then the
    named float64 little-endian grids in row-major order."""
    header = {
        "h": meas.dims[0],
        "w": meas.dims[1],
        "alpha": meas.alpha,
        "seed": meas.seed,
        "fields": ["intensities", "magnitudes"],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(Path(path), "wb") as f:
        f.write(PRM1_MAGIC)
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        for name in header["fields"]:
            f.write(np.ascontiguousarray(getattr(meas, name), dtype="<f8").tobytes())


def load_prm(path) -> Measurement:
    raw = Path(path).read_bytes()
    if len(raw) < len(PRM1_MAGIC) + 4 or raw[: len(PRM1_MAGIC)] != PRM1_MAGIC:
        raise MeasurementFormatError(f"not a PRM1 file: {path}")
    off = len(PRM1_MAGIC)
    (hlen,) = struct.unpack_from("<I", raw, off)
    off += 4
    try:
        header = json.loads(raw[off : off + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MeasurementFormatError(f"bad PRM1 header: {exc}") from exc
    off += hlen
    h, w = int(header["h"]), int(header["w"])
    n = 4 * h * w
    grids = {}
    for name in header["fields"]:
        end = off + 8 * n
        if end > len(raw):
            raise MeasurementFormatError(f"truncated PRM1 field {name!r}")
        grids[name] = np.frombuffer(raw[off:end], dtype="<f8").reshape(2 * h, 2 * w).astype(np.float64)
        off = end
    seed = header.get("seed")
    return Measurement(
        intensities=grids["intensities"],
        magnitudes=grids["magnitudes"],
        alpha=float(header["alpha"]),
        dims=(h, w),
        seed=None if seed is None else int(seed),
    )
