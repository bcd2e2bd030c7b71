"""Stochastic refinement around the classical solvers.

One outer step denoises the running iterate, blends the measured
magnitudes with the iterate's own spectrum under a per-step weight
lambda_i, re-anchors with K HIO iterations against the blended data, and
re-injects Gaussian noise of std alpha*sqrt(lambda_i)/sqrt(2). A single
chain is the small pipeline; several chains averaged elementwise give the
large variant. Chain randomness uses split streams keyed by chain index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng as prng
from .d4 import align_conjugate_orientation
from .denoise import IdentityDenoiser
from .fourier import FourierOp, Measurement
from .hio import HioConfig, measurement_projection, run_hio
from .init_stage import InitCandidate, InitConfig, initialization_stage


@dataclass(frozen=True)
class LambdaSchedule:
    lambdas: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=np.float64)
        object.__setattr__(self, "lambdas", lam)
        if lam.ndim != 1 or len(lam) < 1:
            raise ValueError("schedule must be a non-empty vector")
        if np.any(lam <= 0.0) or np.any(lam > 1.0):
            raise ValueError("schedule entries must lie in (0, 1]")

    def __len__(self) -> int:
        return len(self.lambdas)

    def __getitem__(self, i: int) -> float:
        return float(self.lambdas[i])


def default_schedule(T: int, lambda_max: float = 1.0, lambda_min: float = 0.01) -> LambdaSchedule:
    """Logarithmically decreasing weights from lambda_max down to lambda_min."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if not 0.0 < lambda_min <= lambda_max <= 1.0:
        raise ValueError(f"need 0 < lambda_min <= lambda_max <= 1, got ({lambda_max}, {lambda_min})")
    if T == 1:
        return LambdaSchedule(np.array([lambda_max]))
    lam = np.exp(np.linspace(math.log(lambda_max), math.log(lambda_min), T))
    lam[0], lam[-1] = lambda_max, lambda_min  # endpoint-exact
    return LambdaSchedule(lam)


@dataclass(frozen=True)
class PipelineConfig:
    T: int = 18
    K: int = 5
    beta: float = 0.9
    alpha: float | None = None  # None: take the measurement's alpha
    chains: int = 1
    master_seed: int = 0
    schedule: LambdaSchedule | None = None
    denoiser: object = field(default_factory=IdentityDenoiser)
    sigma_floor: float | None = None  # denoiser sigma at step 1; None: alpha/sqrt(2)

    def __post_init__(self):
        if self.T < 1 or self.K < 1 or self.chains < 1:
            raise ValueError("T, K and chains must all be >= 1")

    def resolved_schedule(self) -> LambdaSchedule:
        sched = self.schedule or default_schedule(self.T)
        if len(sched) != self.T:
            raise ValueError(f"schedule length {len(sched)} does not match T={self.T}")
        return sched

    def resolved_alpha(self, meas: Measurement) -> float:
        return meas.alpha if self.alpha is None else float(self.alpha)

    def hio_config(self) -> HioConfig:
        return HioConfig(beta=self.beta)


@dataclass(frozen=True)
class ChainTrace:
    transform: str
    chain: int
    residuals: np.ndarray
    psnrs: np.ndarray | None = None


@dataclass(frozen=True)
class ReconstructionResult:
    images: list[np.ndarray]
    aggregate: np.ndarray
    traces: list[ChainTrace]
    master_seed: int
    init_images: list[np.ndarray]
    iterates: list[list[np.ndarray]] | None = None


def blend_measurement(y: np.ndarray, x_tilde: np.ndarray, lambda_i: float,
                      op: FourierOp) -> np.ndarray:
    """Convex combination lambda*y + (1 - lambda)*|A x_tilde|."""
    if not 0.0 <= lambda_i <= 1.0:
        raise ValueError(f"lambda must be in [0, 1], got {lambda_i}")
    return lambda_i * y + (1.0 - lambda_i) * np.abs(op.apply(x_tilde))


def noise_scale(alpha: float, lambda_i: float) -> float:
    """Std of the injected refinement noise: alpha * sqrt(lambda) / sqrt(2)."""
    return alpha * math.sqrt(lambda_i) / math.sqrt(2.0)


def langevin_update_eq15(x_t: np.ndarray, meas: Measurement, lambda_t: float,
                         alpha: float, denoiser, sigma_t: float,
                         rng: np.random.Generator | None) -> np.ndarray:
    """Analytic single-projection update (ER data step plus noise).

    Kept alongside the HIO-substituted step for testing and ablation: with
    lambda = 1 it reduces to the plain measurement projection of the
    denoised estimate, with lambda = 0 it returns the denoised estimate.
    """
    op = FourierOp.for_image(x_t)
    x_tilde = denoiser.denoise(x_t, sigma_t)
    blended = blend_measurement(meas.magnitudes, x_tilde, lambda_t, op)
    out = measurement_projection(x_tilde, blended)
    coef = noise_scale(alpha, lambda_t)
    if coef > 0.0:
        if rng is None:
            raise ValueError("an rng is required when the noise coefficient is nonzero")
        out = out + coef * rng.standard_normal(out.shape)
    return out


def sigma_for_step(cfg: PipelineConfig, alpha: float, i: int) -> float:
    """Denoiser noise level at outer step i: the std of the noise injected
    at the end of step i-1 (step 1 uses the configured floor)."""
    sched = cfg.resolved_schedule()
    if i <= 1:
        if cfg.sigma_floor is not None:
            return float(cfg.sigma_floor)
        return noise_scale(alpha, 1.0)
    return noise_scale(alpha, sched[i - 2])


def prnet_step(x_prev: np.ndarray, meas: Measurement, i: int, cfg: PipelineConfig,
               rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """One outer iteration: returns (denoised estimate x_i, next iterate x'_i).

    At i = T the denoised estimate is the final output: no data step and no
    noise injection, and no randomness is consumed after denoising.
    """
    if not 1 <= i <= cfg.T:
        raise ValueError(f"step index {i} outside 1..{cfg.T}")
    alpha = cfg.resolved_alpha(meas)
    x_i = cfg.denoiser.denoise(x_prev, sigma_for_step(cfg, alpha, i))
    if i == cfg.T:
        return x_i, x_i
    op = FourierOp.for_image(x_i)
    lam = cfg.resolved_schedule()[i - 1]
    blended = blend_measurement(meas.magnitudes, x_i, lam, op)
    z, _ = run_hio(x_i, blended, cfg.K, cfg.hio_config())
    coef = noise_scale(alpha, lam)
    if coef > 0.0:
        x_next = z + coef * rng.standard_normal(z.shape)
    else:
        x_next = z
    return x_i, x_next


def aggregate_mean(images: list[np.ndarray]) -> np.ndarray:
    """Elementwise arithmetic mean of equal-sized images."""
    if not images:
        raise ValueError("cannot aggregate an empty list")
    first = np.asarray(images[0], dtype=np.float64)
    for img in images[1:]:
        if np.asarray(img).shape != first.shape:
            raise ValueError("aggregate inputs must share dimensions")
    return np.mean(np.stack([np.asarray(im, dtype=np.float64) for im in images]), axis=0)


def run_prnet(meas: Measurement, cfg: PipelineConfig,
              init_cfg: InitConfig | None = None,
              inits: list[np.ndarray] | None = None,
              workers: int = 1,
              truth: np.ndarray | None = None,
              stream_key: tuple = (),
              collect_iterates: bool = False) -> ReconstructionResult:
    """Full pipeline: initialization, T refinement steps per chain, mean
    aggregation. chains = 1 is the small variant, chains > 1 the large one.

    ``inits`` overrides the initialization stage (used by TTA, which
    transforms one shared set of starts); ``stream_key`` namespaces the
    chain RNG streams so ensemble branches stay independent.
    """
    op = FourierOp(*meas.dims)
    if inits is None:
        icfg = init_cfg or InitConfig(keep=cfg.chains, master_seed=cfg.master_seed)
        if icfg.keep != cfg.chains:
            icfg = replace(icfg, keep=cfg.chains)
        candidates = initialization_stage(meas, icfg, cfg.hio_config(), workers=workers)
        inits = [c.image for c in candidates]
    if len(inits) != cfg.chains:
        raise ValueError(f"{len(inits)} initializations for {cfg.chains} chains")

    from .metrics import psnr  # local import to avoid a cycle

    def run_chain(chain: int) -> tuple[np.ndarray, ChainTrace, list[np.ndarray]]:
        stream = prng.split(cfg.master_seed, *stream_key, "chain", chain)
        x_prime = np.asarray(inits[chain], dtype=np.float64)
        residuals = np.empty(cfg.T)
        psnrs = np.empty(cfg.T) if truth is not None else None
        iterates = [x_prime] if collect_iterates else []
        x_i = x_prime
        for i in range(1, cfg.T + 1):
            x_i, x_prime = prnet_step(x_prime, meas, i, cfg, stream)
            residuals[i - 1] = op.residual(x_i, meas)
            if psnrs is not None:
                psnrs[i - 1] = psnr(truth, x_i)
            if collect_iterates and i < cfg.T:
                iterates.append(x_prime)
        trace = ChainTrace("R0", chain, residuals, psnrs)
        return x_i, trace, iterates

    outcomes = prng.pmap(run_chain, range(cfg.chains), workers)
    # chains occasionally tumble to the conjugate-flip twin mid-run, so the
    # ensemble gauge is re-fixed before averaging
    finals = align_conjugate_orientation([o[0] for o in outcomes])
    return ReconstructionResult(
        images=finals,
        aggregate=aggregate_mean(finals),
        traces=[o[1] for o in outcomes],
        master_seed=cfg.master_seed,
        init_images=list(inits),
        iterates=[o[2] for o in outcomes] if collect_iterates else None,
    )
