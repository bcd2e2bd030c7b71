"""Benchmark harness: image dir x noise levels x Monte Carlo runs x methods.

Every row simulates its own measurement from a seed hashed out of
(master seed, image name, alpha, run), reconstructs with the requested
method, resolves the conjugate-flip ambiguity, and records PSNR / SSIM /
residual / runtime. Rows are written in sorted order so reruns are
byte-identical apart from the wall-clock column.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import rng as prng
from .fourier import FourierOp, Measurement
from .hio import HioConfig, run_hio
from .image import load_png
from .init_stage import InitConfig, initialization_stage, random_phase_start
from .metrics import resolve_conjugate_flip
from .pipeline import PipelineConfig
from .tta import run_with_tta

METHODS = ("hio", "init", "prnet-small", "prnet-large")


@dataclass(frozen=True)
class BenchmarkRow:
    image: str
    alpha: float
    run: int
    method: str
    tta: str
    psnr_db: float
    ssim: float
    flip_resolved: bool
    residual: float
    runtime_s: float


@dataclass(frozen=True)
class BenchmarkReport:
    rows: list[BenchmarkRow]
    skipped: list[str]

    @property
    def any_skipped(self) -> bool:
        return bool(self.skipped)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def reconstruct_one(meas: Measurement, method: str, cfg: PipelineConfig,
                    init_cfg: InitConfig, tta_mode: str = "none",
                    workers: int = 1, truth=None):
    """Dispatch a single reconstruction; returns (image, result-or-None)."""
    if method == "hio":
        stream = prng.split(init_cfg.master_seed, "hio-start")
        x0 = random_phase_start(meas, stream)
        img, _trace = run_hio(x0, meas, init_cfg.long_iters, HioConfig(beta=cfg.beta))
        return img, None
    if method == "init":
        cands = initialization_stage(meas, replace(init_cfg, keep=1), cfg.hio_config(), workers)
        return cands[0].image, None
    if method in ("prnet-small", "prnet-large"):
        chains = 10 if method == "prnet-large" else 1
        starts = 100 if method == "prnet-large" else init_cfg.num_starts
        run_cfg = replace(cfg, chains=chains)
        run_init = replace(init_cfg, keep=chains, num_starts=max(starts, chains))
        result = run_with_tta(meas, run_cfg, tta_mode, init_cfg=run_init, workers=workers, truth=truth)
        return result.aggregate, result
    raise ValueError(f"unknown method {method!r} (choose from {', '.join(METHODS)})")


def benchmark(image_dir, alphas, runs: int, methods, cfg: PipelineConfig,
              init_cfg: InitConfig, master_seed: int = 0, tta_mode: str = "none",
              workers: int = 1) -> BenchmarkReport:
    image_dir = Path(image_dir)
    paths = sorted(image_dir.glob("*.png"))
    if not paths:
        raise ValueError(f"no .png images found in {image_dir}")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r} (choose from {', '.join(METHODS)})")

    images = {}
    skipped = []
    for p in paths:
        try:
            images[p.name] = load_png(p)
        except Exception as exc:  # noqa: BLE001 - report and move on
            skipped.append(f"{p.name}: {exc}")

    tasks = [
        (name, float(alpha), run, method)
        for name in sorted(images)
        for alpha in alphas
        for run in range(runs)
        for method in methods
    ]

    def one(task) -> BenchmarkRow:
        name, alpha, run, method = task
        truth = images[name]
        op = FourierOp.for_image(truth)
        seed = prng.seed_from(master_seed, name, alpha, run)
        meas = op.simulate(truth, alpha, prng.split(seed, "measurement"), seed=seed)
        row_cfg = replace(cfg, master_seed=seed)
        row_init = replace(init_cfg, master_seed=seed)
        t0 = time.perf_counter()
        recon, _ = reconstruct_one(meas, method, row_cfg, row_init, tta_mode, workers=1)
        elapsed = time.perf_counter() - t0
        oriented, report = resolve_conjugate_flip(recon, truth)
        return BenchmarkRow(
            image=name, alpha=alpha, run=run, method=method, tta=tta_mode,
            psnr_db=report.psnr_db, ssim=report.ssim, flip_resolved=report.resolved_flip,
            residual=op.residual(oriented, meas), runtime_s=elapsed,
        )

    rows = prng.pmap(one, tasks, workers)
    rows.sort(key=lambda r: (r.image, r.alpha, r.run, r.method))
    return BenchmarkReport(rows=rows, skipped=skipped)


ROW_HEADER = ["image", "alpha", "run", "method", "tta", "psnr_db", "ssim",
              "flip_resolved", "residual", "runtime_s"]


def write_rows_csv(report: BenchmarkReport, path) -> None:
    with open(Path(path), "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(ROW_HEADER)
        for r in report.rows:
            writer.writerow([
                r.image, _fmt(r.alpha), r.run, r.method, r.tta, _fmt(r.psnr_db),
                _fmt(r.ssim), _fmt(r.flip_resolved), _fmt(r.residual), _fmt(r.runtime_s),
            ])


def summarize(report: BenchmarkReport) -> list[dict]:
    """Mean PSNR/SSIM per (method, alpha), in sorted key order."""
    groups: dict[tuple[str, float], list[BenchmarkRow]] = {}
    for r in report.rows:
        groups.setdefault((r.method, r.alpha), []).append(r)
    out = []
    for (method, alpha) in sorted(groups):
        rows = groups[(method, alpha)]
        out.append({
            "method": method,
            "alpha": alpha,
            "n": len(rows),
            "mean_psnr_db": float(np.mean([r.psnr_db for r in rows])),
            "mean_ssim": float(np.mean([r.ssim for r in rows])),
            "mean_runtime_s": float(np.mean([r.runtime_s for r in rows])),
        })
    return out


def write_summary_csv(report: BenchmarkReport, path) -> None:
    with open(Path(path), "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["method", "alpha", "n", "mean_psnr_db", "mean_ssim", "mean_runtime_s"])
        for s in summarize(report):
            writer.writerow([s["method"], _fmt(s["alpha"]), s["n"], _fmt(s["mean_psnr_db"]),
                             _fmt(s["mean_ssim"]), _fmt(s["mean_runtime_s"])])


def histogram_bins(values, bins: int = 40) -> list[tuple[float, float, int]]:
    """Uniform bins over the observed finite range (degenerate range gets
    one all-inclusive bin)."""
    finite = np.asarray([v for v in values if math.isfinite(v)], dtype=np.float64)
    if len(finite) == 0:
        return []
    lo, hi = float(finite.min()), float(finite.max())
    if lo == hi:
        return [(lo, hi, len(finite))]
    counts, edges = np.histogram(finite, bins=bins, range=(lo, hi))
    return [(float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(bins)]


def write_histogram_csv(report: BenchmarkReport, path, bins: int = 40) -> None:
    with open(Path(path), "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["metric", "bin_lo", "bin_hi", "count"])
        for metric, values in (("psnr_db", [r.psnr_db for r in report.rows]),
                               ("ssim", [r.ssim for r in report.rows])):
            for lo, hi, count in histogram_bins(values, bins):
                writer.writerow([metric, _fmt(lo), _fmt(hi), count])
