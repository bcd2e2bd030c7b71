"""Classical projection solvers: magnitude projection, ER, and HIO.

The iterate lives on the full padded grid so the hybrid input-output
feedback can act on the off-support region; results are reported cropped
to the image block. All functions here are deterministic and pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fourier import FourierOp, Measurement
from .image import crop_support, default_support, pad_to_grid


@dataclass(frozen=True)
class HioConfig:
    beta: float = 0.9
    enforce_support: bool = True
    enforce_nonneg: bool = True

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must be in [0, 1], got {self.beta}")


@dataclass(frozen=True)
class SolverTrace:
    residuals: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def iterations(self) -> int:
        return len(self.residuals)


def _unit_phase(field: np.ndarray) -> np.ndarray:
    """field / |field| with the zero-magnitude guard (phase factor 1 there)."""
    mag = np.abs(field)
    safe = np.where(mag == 0.0, 1.0, mag)
    phase = field / safe
    return np.where(mag == 0.0, 1.0 + 0.0j, phase)


def project_grid(grid: np.ndarray, magnitudes: np.ndarray) -> np.ndarray:
    """Measurement-space projection on the full grid:
    ifft(y * phase(fft(grid))), real part."""
    spectrum = np.fft.fft2(grid, norm="ortho")
    return np.fft.ifft2(magnitudes * _unit_phase(spectrum), norm="ortho").real


def measurement_projection(img: np.ndarray, magnitudes: np.ndarray) -> np.ndarray:
    """A^dagger( y * Ax/|Ax| ) for an in-support image; returns H x W."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    if magnitudes.shape != (2 * h, 2 * w):
        raise ValueError(f"magnitude grid {magnitudes.shape} does not match image {img.shape}")
    return crop_support(project_grid(pad_to_grid(img), magnitudes), h, w)


def _violations(projected: np.ndarray, cfg: HioConfig, support: np.ndarray | None) -> np.ndarray:
    """Index set gamma where the projected iterate breaks the spatial constraints."""
    gamma = np.zeros(projected.shape, dtype=bool)
    if cfg.enforce_support and support is not None:
        gamma |= ~support & (projected != 0.0)
    if cfg.enforce_nonneg:
        inside = support if support is not None else True
        gamma |= inside & (projected < 0.0)
    return gamma


def hio_step(prev: np.ndarray, projected: np.ndarray, cfg: HioConfig,
             support: np.ndarray | None = None) -> np.ndarray:
    """Hybrid input-output update: keep the projection where constraints
    hold, feed back prev - beta * projection where they are violated."""
    prev = np.asarray(prev, dtype=np.float64)
    projected = np.asarray(projected, dtype=np.float64)
    if prev.shape != projected.shape:
        raise ValueError(f"shape mismatch {prev.shape} vs {projected.shape}")
    gamma = _violations(projected, cfg, support)
    return np.where(gamma, prev - cfg.beta * projected, projected)


def er_step(prev: np.ndarray, projected: np.ndarray, cfg: HioConfig,
            support: np.ndarray | None = None) -> np.ndarray:
    """Error-reduction update: hard-project the violating indices to 0."""
    projected = np.asarray(projected, dtype=np.float64)
    out = projected.copy()
    if cfg.enforce_support and support is not None:
        out[~support] = 0.0
    if cfg.enforce_nonneg:
        np.maximum(out, 0.0, out=out)
    return out


def run_hio(x0: np.ndarray, meas_or_mags, iters: int, cfg: HioConfig | None = None
            ) -> tuple[np.ndarray, SolverTrace]:
    """Run HIO from an in-support start against magnitude data.

    Accepts a :class:`Measurement` or a raw 2H x 2W magnitude grid. The
    trace records the residual ||y - |A crop(grid)|||^2 of the reported
    (cropped) reconstruction after every iteration.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    cfg = cfg or HioConfig()
    x0 = np.asarray(x0, dtype=np.float64)
    h, w = x0.shape
    magnitudes = meas_or_mags.magnitudes if isinstance(meas_or_mags, Measurement) else np.asarray(meas_or_mags)
    if magnitudes.shape != (2 * h, 2 * w):
        raise ValueError(f"magnitude grid {magnitudes.shape} does not match start {x0.shape}")
    support = default_support(h, w)

    grid = pad_to_grid(x0)
    residuals = np.empty(iters)
    for k in range(iters):
        projected = project_grid(grid, magnitudes)
        grid = hio_step(grid, projected, cfg, support)
        cropped_spectrum = np.fft.fft2(np.where(support, grid, 0.0), norm="ortho")
        diff = magnitudes - np.abs(cropped_spectrum)
        residuals[k] = np.sum(diff * diff)
    return crop_support(grid, h, w), SolverTrace(residuals)
