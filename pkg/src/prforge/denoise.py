"""Pluggable denoisers and the score-from-denoiser bridge.

A denoiser is any object with ``denoise(x, sigma) -> x_hat`` taking the
noise standard deviation in pixel units. Three reference implementations
are provided: identity, a mild separable Gaussian, and the fixed 6-layer
residual CNN driven by a PRWT weights archive.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from ._kernels import conv3x3_reflect
from .image import as_image
from .weights import CNN_ARCH, WeightsArchive


class IdentityDenoiser:
    kind = "identity"

    def denoise(self, x: np.ndarray, sigma: float) -> np.ndarray:
        return as_image(x)


class GaussianDenoiser:
    """Separable Gaussian blur with std_px = clamp(kappa * sigma, 0, max_std)."""

    kind = "gaussian"

    def __init__(self, kappa: float = 5.0, max_std: float = 3.0):
        if kappa < 0 or max_std < 0:
            raise ValueError("kappa and max_std must be non-negative")
        self.kappa = float(kappa)
        self.max_std = float(max_std)

    def denoise(self, x: np.ndarray, sigma: float) -> np.ndarray:
        x = as_image(x)
        std = min(max(self.kappa * float(sigma), 0.0), self.max_std)
        if std == 0.0:
            return x
        # scipy's "mirror" mode matches np.pad reflect (no edge repeat)
        return ndimage.gaussian_filter(x, std, mode="mirror", truncate=4.0)


def cnn_forward(weights: WeightsArchive, x2: np.ndarray) -> np.ndarray:
    """Forward pass of the fixed residual CNN.

    x2 is the (2, H, W) stack of image channel and constant-sigma channel;
    returns the predicted (H, W) noise residual. Compute is float64 on
    float32 weights.
    """
    weights.validate_cnn()
    x2 = np.asarray(x2, dtype=np.float64)
    if x2.ndim != 3 or x2.shape[0] != 2:
        raise ValueError(f"expected (2, H, W) input, got {x2.shape}")
    if x2.shape[1] < 3 or x2.shape[2] < 3:
        raise ValueError("residual CNN needs H, W >= 3")
    act = x2
    n_layers = len(CNN_ARCH) // 2
    for idx in range(1, n_layers + 1):
        w = weights.tensor(f"conv{idx}.weight").astype(np.float64)
        b = weights.tensor(f"conv{idx}.bias").astype(np.float64)
        act = conv3x3_reflect(act, w, b, relu=idx < n_layers)
    return act[0]


class CnnDenoiser:
    """Residual CNN denoiser: x_hat = x - r_hat(x, sigma)."""

    kind = "residual_cnn"

    def __init__(self, weights: WeightsArchive):
        weights.validate_cnn()
        self.weights = weights

    def denoise(self, x: np.ndarray, sigma: float) -> np.ndarray:
        x = as_image(x)
        stacked = np.stack([x, np.full_like(x, float(sigma))])
        return x - cnn_forward(self.weights, stacked)


def score_from_denoiser(model, x: np.ndarray, sigma: float) -> np.ndarray:
    """Marginal score estimate (denoise(x, sigma) - x) / sigma^2."""
    if sigma <= 0:
        raise ValueError("sigma must be positive for the score relation")
    x = as_image(x)
    return (model.denoise(x, sigma) - x) / (sigma * sigma)


def make_denoiser(kind: str, kappa: float = 5.0, weights: WeightsArchive | None = None):
    """Factory used by the CLI and benchmark harness."""
    if kind == "identity":
        return IdentityDenoiser()
    if kind == "gaussian":
        return GaussianDenoiser(kappa=kappa)
    if kind == "residual_cnn":
        if weights is None:
            raise ValueError("residual_cnn denoiser requires a weights archive")
        return CnnDenoiser(weights)
    raise ValueError(f"unknown denoiser kind {kind!r} (identity, gaussian, residual_cnn)")
