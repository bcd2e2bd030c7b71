"""Robust multi-start initialization.

Runs m short HIO explorations from random-phase starts, keeps the k
candidates with the lowest data residual, then refines each with a long
HIO run. Branch randomness comes from per-branch split streams, so the
result is a pure function of (measurement, config) for any worker count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng as prng
from .d4 import align_conjugate_orientation
from .fourier import FourierOp, Measurement
from .hio import HioConfig, run_hio


@dataclass(frozen=True)
class InitConfig:
    num_starts: int = 50
    short_iters: int = 50
    long_iters: int = 1000
    keep: int = 1
    master_seed: int = 0

    def __post_init__(self):
        for name in ("num_starts", "short_iters", "long_iters", "keep"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.keep > self.num_starts:
            raise ValueError(f"keep={self.keep} exceeds num_starts={self.num_starts}")


@dataclass(frozen=True)
class InitCandidate:
    image: np.ndarray
    residual: float
    branch: int


def random_phase_start(meas: Measurement, rng: np.random.Generator) -> np.ndarray:
    """x0 = A^dagger( y * e^{j theta} ) with theta ~ Uniform[0, 2pi) per bin."""
    op = FourierOp(*meas.dims)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=meas.magnitudes.shape)
    return op.pseudoinverse(meas.magnitudes * np.exp(1j * theta))


def select_best(candidates: list[InitCandidate], k: int) -> list[InitCandidate]:
    """k smallest residuals, ties broken by lower branch index."""
    if not 1 <= k <= len(candidates):
        raise ValueError(f"k={k} out of range for {len(candidates)} candidates")
    return sorted(candidates, key=lambda c: (c.residual, c.branch))[:k]


def _align_orientation(candidates: list[InitCandidate]) -> list[InitCandidate]:
    """Gauge-fix candidate orientations after refinement.

    Long HIO runs tumble between the conjugate-flip twins (the flip leaves
    the residual unchanged), so refined candidates come back with mixed
    orientations; mixed orientations would poison ensemble averaging
    downstream. Alignment must therefore happen after refinement.
    """
    aligned = align_conjugate_orientation([c.image for c in candidates])
    return [InitCandidate(img, c.residual, c.branch) for img, c in zip(aligned, candidates)]


def initialization_stage(meas: Measurement, cfg: InitConfig,
                         hio_cfg: HioConfig | None = None,
                         workers: int = 1) -> list[InitCandidate]:
    """Short-run exploration, best-k selection, long refinement.

    Returns k refined candidates sorted by ascending residual (ties by
    branch index). Deterministic for a fixed master seed.
    """
    hio_cfg = hio_cfg or HioConfig()

    def explore(branch: int) -> InitCandidate:
        stream = prng.split(cfg.master_seed, "init", branch)
        x0 = random_phase_start(meas, stream)
        img, trace = run_hio(x0, meas, cfg.short_iters, hio_cfg)
        return InitCandidate(img, float(trace.residuals[-1]), branch)

    shorts = prng.pmap(explore, range(cfg.num_starts), workers)
    picked = select_best(shorts, cfg.keep)

    def refine(cand: InitCandidate) -> InitCandidate:
        img, trace = run_hio(cand.image, meas, cfg.long_iters, hio_cfg)
        return InitCandidate(img, float(trace.residuals[-1]), cand.branch)

    refined = prng.pmap(refine, picked, workers)
    ordered = sorted(refined, key=lambda c: (c.residual, c.branch))
    return _align_orientation(ordered)
