"""prforge: Fourier phase retrieval with stochastic denoiser-guided refinement.

Reconstructs real, non-negative, compactly supported images from
oversampled Fourier magnitudes: classical HIO with multi-start
initialization, a Langevin-style refinement loop around a pluggable
denoiser, parallel-chain ensembling, and dihedral test-time augmentation.
"""

from .d4 import D4, apply_d4, inverse_d4
from .denoise import (CnnDenoiser, GaussianDenoiser, IdentityDenoiser, cnn_forward,
                      make_denoiser, score_from_denoiser)
from .fourier import FourierOp, Measurement, load_prm, save_prm
from .hio import HioConfig, SolverTrace, er_step, hio_step, measurement_projection, run_hio
from .image import as_image, crop_support, default_support, load_png, pad_to_grid, save_png
from .init_stage import InitConfig, initialization_stage, random_phase_start, select_best
from .metrics import MetricReport, psnr, resolve_conjugate_flip, ssim
from .pipeline import (LambdaSchedule, PipelineConfig, ReconstructionResult, aggregate_mean,
                       blend_measurement, default_schedule, langevin_update_eq15, prnet_step,
                       run_prnet)
from .tta import magnitude_permutation, run_with_tta, transform_measurement
from .weights import WeightsArchive, load_weights, save_weights, zero_weights

__version__ = "0.1.0"
