"""Run configuration: flat key-value files plus CLI overrides.

The file format is a TOML-compatible subset: one ``key = value`` pair per
line, ``#`` comments, ints/floats/booleans/quoted strings. Every key is
optional and defaults to the reference hyperparameters; unknown keys are
rejected by name so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .hio import HioConfig
from .init_stage import InitConfig
from .pipeline import LambdaSchedule, PipelineConfig, default_schedule
from .tta import TTA_MODES


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    alpha: float = 3.0
    beta: float = 0.9
    T: int = 18
    K: int = 5
    chains: int | None = None       # method-dependent default (1 small, 10 large)
    num_starts: int | None = None   # method-dependent default (50 small, 100 large)
    short_iters: int = 50
    long_iters: int = 1000
    master_seed: int = 0
    lambda_max: float = 1.0
    lambda_min: float = 0.01
    denoiser: str = "gaussian"
    kappa: float = 5.0
    sigma_floor: float | None = None
    enforce_support: bool = True
    enforce_nonneg: bool = True
    tta: str = "none"
    workers: int | None = None
    weights: str | None = None

    def __post_init__(self):
        if self.tta not in TTA_MODES:
            raise ConfigError(f"tta must be one of {TTA_MODES}, got {self.tta!r}")
        if self.denoiser not in ("identity", "gaussian", "residual_cnn"):
            raise ConfigError(f"unknown denoiser {self.denoiser!r}")

    def pipeline_config(self, chains: int, denoiser, schedule: LambdaSchedule | None = None,
                        alpha: float | None = None) -> PipelineConfig:
        return PipelineConfig(
            T=self.T, K=self.K, beta=self.beta, alpha=alpha, chains=chains,
            master_seed=self.master_seed,
            schedule=schedule or default_schedule(self.T, self.lambda_max, self.lambda_min),
            denoiser=denoiser, sigma_floor=self.sigma_floor,
        )

    def init_config(self, num_starts: int, keep: int) -> InitConfig:
        return InitConfig(
            num_starts=num_starts, short_iters=self.short_iters,
            long_iters=self.long_iters, keep=keep, master_seed=self.master_seed,
        )

    def hio_config(self) -> HioConfig:
        return HioConfig(beta=self.beta, enforce_support=self.enforce_support,
                         enforce_nonneg=self.enforce_nonneg)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_scalar(key: str, raw: str):
    raw = raw.strip()
    if raw.startswith('"') and raw.endswith('"') and len(raw) >= 2:
        return raw[1:-1]
    if raw.startswith("'") and raw.endswith("'") and len(raw) >= 2:
        return raw[1:-1]
    if raw in ("true", "false"):
        return raw == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"cannot parse value {raw!r} for key {key!r}") from exc


def parse_config_text(text: str) -> dict:
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        if key in values:
            raise ConfigError(f"duplicate config key {key!r}")
        values[key] = _parse_scalar(key, raw)
    return values


def load_run_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then file values, then explicit CLI overrides."""
    values: dict = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        values.update(parse_config_text(p.read_text()))
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = val
    try:
        return RunConfig(**values)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
