"""Reconstruction quality metrics and trivial-ambiguity resolution.

PSNR uses a peak of 255 and an infinite sentinel for exact matches. SSIM
is the standard single-scale formulation (11x11 Gaussian window with
sigma 1.5, K1 = 0.01, K2 = 0.03, L = 255) averaged over valid window
positions. The conjugate-flip ambiguity of Fourier magnitudes is resolved
by scoring the reconstruction against its 180-degree rotation; circular
shifts are deliberately left unresolved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .d4 import D4, apply_d4


@dataclass(frozen=True)
class MetricReport:
    psnr_db: float
    ssim: float
    resolved_flip: bool


def psnr(a: np.ndarray, b: np.ndarray, peak: float = 255.0) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def _gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    half = (size - 1) / 2.0
    coords = np.arange(size) - half
    g = np.exp(-(coords**2) / (2.0 * sigma * sigma))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def ssim(a: np.ndarray, b: np.ndarray, window: int = 11, sigma: float = 1.5,
         k1: float = 0.01, k2: float = 0.03, peak: float = 255.0) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    if a.shape[0] < window or a.shape[1] < window:
        raise ValueError(f"image {a.shape} smaller than the {window}x{window} window")
    kernel = _gaussian_window(window, sigma)
    win_a = np.lib.stride_tricks.sliding_window_view(a, (window, window))
    win_b = np.lib.stride_tricks.sliding_window_view(b, (window, window))
    axes = ([2, 3], [0, 1])
    mu_a = np.tensordot(win_a, kernel, axes=axes)
    mu_b = np.tensordot(win_b, kernel, axes=axes)
    ea2 = np.tensordot(win_a * win_a, kernel, axes=axes)
    eb2 = np.tensordot(win_b * win_b, kernel, axes=axes)
    eab = np.tensordot(win_a * win_b, kernel, axes=axes)
    var_a = ea2 - mu_a * mu_a
    var_b = eb2 - mu_b * mu_b
    cov = eab - mu_a * mu_b
    c1 = (k1 * peak) ** 2
    c2 = (k2 * peak) ** 2
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def resolve_conjugate_flip(recon: np.ndarray, truth: np.ndarray
                           ) -> tuple[np.ndarray, MetricReport]:
    """Score the reconstruction and its 180-degree rotation against the
    truth; keep whichever has higher PSNR (ties keep the unflipped one)."""
    recon = np.asarray(recon, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if recon.shape != truth.shape:
        raise ValueError(f"shape mismatch {recon.shape} vs {truth.shape}")
    flipped = apply_d4(recon, D4.R180)
    p_plain = psnr(truth, recon)
    p_flip = psnr(truth, flipped)
    if p_flip > p_plain:
        return flipped, MetricReport(p_flip, ssim(truth, flipped), True)
    return recon, MetricReport(p_plain, ssim(truth, recon), False)
