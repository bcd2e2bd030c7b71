"""Test-time augmentation over the square's symmetry group.

Each image-domain transform has an exact counterpart permutation of the
oversampled magnitude grid: in-support flips become cyclic reversals of
the frequency axes and the transpose carries over directly. TTA runs the
pipeline once per transform on permuted measurements and transformed
starts, inverse-transforms the outputs, and averages.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from . import rng as prng
from .d4 import (ALL_TRANSFORMS, D4, FLIP_TRANSFORMS, _DECOMP, align_conjugate_orientation,
                 apply_d4, inverse_d4, requires_square)
from .fourier import Measurement
from .init_stage import InitConfig, initialization_stage
from .pipeline import ChainTrace, PipelineConfig, ReconstructionResult, aggregate_mean, run_prnet

TTA_MODES = ("none", "flip", "d4")


def tta_set(mode: str) -> tuple[D4, ...]:
    if mode == "none":
        return (D4.R0,)
    if mode == "flip":
        return FLIP_TRANSFORMS
    if mode == "d4":
        return ALL_TRANSFORMS
    raise ValueError(f"unknown tta mode {mode!r} (none, flip, d4)")


def _cyclic_reverse(grid: np.ndarray, axis: int) -> np.ndarray:
    """Index map k -> (-k) mod N along one axis: M'[0] = M[0], M'[k] = M[N-k]."""
    return np.roll(np.flip(grid, axis=axis), 1, axis=axis)


def magnitude_permutation(grid: np.ndarray, t: D4) -> np.ndarray:
    """Permutation P_t of the 2H x 2W magnitude grid with
    |A(t.x)| = P_t(|Ax|) for in-support transforms t."""
    transpose, flip_rows, flip_cols = _DECOMP[t]
    out = np.asarray(grid)
    if flip_cols:
        out = _cyclic_reverse(out, 1)
    if flip_rows:
        out = _cyclic_reverse(out, 0)
    if transpose:
        if out.shape[0] != out.shape[1]:
            raise ValueError(f"{t.value} requires a square grid, got {out.shape}")
        out = out.T
    return np.ascontiguousarray(out)


def transform_measurement(meas: Measurement, t: D4) -> Measurement:
    """Measurement seen from the transformed image: both grids permuted by
    P_t; alpha, dims, and provenance unchanged."""
    if requires_square(t) and meas.dims[0] != meas.dims[1]:
        raise ValueError(f"{t.value} requires square measurements, got dims {meas.dims}")
    return meas.with_grids(
        magnitude_permutation(meas.intensities, t),
        magnitude_permutation(meas.magnitudes, t),
    )


def run_with_tta(meas: Measurement, cfg: PipelineConfig, mode: str = "none",
                 init_cfg: InitConfig | None = None,
                 workers: int = 1,
                 truth: np.ndarray | None = None) -> ReconstructionResult:
    """Pipeline with symmetry-group ensembling.

    Initializations are computed once from the base measurement, then each
    group element gets its transformed copy of starts and measurement, an
    independent noise stream, and its inverse-transformed output; branches
    are averaged with equal weight 1/|set|.
    """
    if mode == "none":
        return run_prnet(meas, cfg, init_cfg=init_cfg, workers=workers, truth=truth)
    transforms = tta_set(mode)
    if any(requires_square(t) for t in transforms) and meas.dims[0] != meas.dims[1]:
        raise ValueError(f"tta mode {mode!r} requires square images, got dims {meas.dims}")

    icfg = init_cfg or InitConfig(keep=cfg.chains, master_seed=cfg.master_seed)
    if icfg.keep != cfg.chains:
        icfg = replace(icfg, keep=cfg.chains)
    base_inits = [c.image for c in initialization_stage(meas, icfg, cfg.hio_config(), workers=workers)]

    def run_branch(idx_t: tuple[int, D4]) -> ReconstructionResult:
        idx, t = idx_t
        branch_meas = transform_measurement(meas, t)
        branch_inits = [apply_d4(x, t) for x in base_inits]
        branch_truth = apply_d4(truth, t) if truth is not None else None
        return run_prnet(
            branch_meas, cfg, inits=branch_inits, workers=1,
            truth=branch_truth, stream_key=("tta", idx),
        )

    branch_results = prng.pmap(run_branch, list(enumerate(transforms)), workers)

    branch_outputs: list[np.ndarray] = []
    traces: list[ChainTrace] = []
    for t, res in zip(transforms, branch_results):
        inv = inverse_d4(t)
        branch_outputs.append(apply_d4(res.aggregate, inv))
        for tr in res.traces:
            traces.append(ChainTrace(t.value, tr.chain, tr.residuals, tr.psnrs))
    branch_outputs = align_conjugate_orientation(branch_outputs)

    return ReconstructionResult(
        images=branch_outputs,
        aggregate=aggregate_mean(branch_outputs),
        traces=traces,
        master_seed=cfg.master_seed,
        init_images=base_inits,
    )
