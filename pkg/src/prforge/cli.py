"""Command-line entry points: simulate, reconstruct, evaluate, benchmark.

Exit codes: 0 success, 1 runtime/numeric failure, 2 usage or config error.
All subcommands are deterministic given their seeds; ``--workers`` (or the
PRFORGE_WORKERS variable) only caps parallelism.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import rng as prng
from .benchmark import (METHODS, benchmark, summarize, write_histogram_csv,
                        write_rows_csv, write_summary_csv)
from .config import ConfigError, load_run_config
from .denoise import make_denoiser
from .fourier import FourierOp, load_prm, save_prm
from .image import load_png, save_png
from .init_stage import initialization_stage
from .metrics import MetricReport, psnr, resolve_conjugate_flip, ssim
from .pipeline import LambdaSchedule, ReconstructionResult
from .tta import TTA_MODES, run_with_tta
from .weights import WeightsError, load_weights


class UsageError(Exception):
    """Maps to exit code 2."""


def _fmt_float(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def _require_file(path, what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"{what} not found: {p}")
    return p


def cmd_simulate(args) -> int:
    img = load_png(_require_file(args.input, "input image"))
    if args.alpha < 0:
        raise UsageError(f"alpha must be non-negative, got {args.alpha}")
    op = FourierOp.for_image(img)
    meas = op.simulate(img, args.alpha, prng.split(args.seed, "simulate"), seed=args.seed)
    save_prm(meas, args.out)
    print(_fmt_float(op.snr_db(img, meas)))
    return 0


def _build_runtime(args, method: str):
    """Resolve config file + flags into pipeline/init configs and a denoiser."""
    overrides = {
        "tta": getattr(args, "tta", None),
        "master_seed": getattr(args, "seed", None),
        "workers": getattr(args, "workers", None),
        "weights": getattr(args, "weights", None),
    }
    run_cfg = load_run_config(getattr(args, "config", None), overrides)

    archive = None
    schedule = None
    if run_cfg.denoiser == "residual_cnn":
        if run_cfg.weights is None:
            raise UsageError("denoiser residual_cnn requires --weights")
        archive = load_weights(_require_file(run_cfg.weights, "weights file"))
        if archive.lambdas is not None:
            if len(archive.lambdas) != run_cfg.T:
                raise UsageError(
                    f"weights archive lambda length {len(archive.lambdas)} does not match T={run_cfg.T}"
                )
            schedule = LambdaSchedule(archive.lambdas)
    denoiser = make_denoiser(run_cfg.denoiser, kappa=run_cfg.kappa, weights=archive)

    chains = run_cfg.chains if run_cfg.chains is not None else (10 if method == "prnet-large" else 1)
    starts = run_cfg.num_starts if run_cfg.num_starts is not None else (100 if method == "prnet-large" else 50)
    if starts < chains:
        raise UsageError(f"num_starts={starts} is smaller than chains={chains}")
    pipeline_cfg = run_cfg.pipeline_config(chains, denoiser, schedule)
    init_cfg = run_cfg.init_config(starts, chains)
    workers = prng.resolve_workers(run_cfg.workers)
    return run_cfg, pipeline_cfg, init_cfg, workers


def _write_trace(path, result: ReconstructionResult) -> None:
    with_psnr = any(t.psnrs is not None for t in result.traces)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["transform", "chain", "iteration", "residual"] + (["psnr_db"] if with_psnr else []))
        for tr in result.traces:
            for i, res in enumerate(tr.residuals, start=1):
                row = [tr.transform, tr.chain, i, _fmt_float(float(res))]
                if with_psnr:
                    row.append(_fmt_float(float(tr.psnrs[i - 1])) if tr.psnrs is not None else "")
                writer.writerow(row)


def _dump_iterates(prefix: str, result: ReconstructionResult) -> None:
    chain = result.iterates[0]
    h, w = chain[0].shape
    meta = {"h": h, "w": w, "count": len(chain), "dtype": "<f8", "order": "row-major"}
    Path(f"{prefix}_meta.json").write_text(json.dumps(meta, sort_keys=True))
    for i, arr in enumerate(chain):
        Path(f"{prefix}_{i:03d}.f64").write_bytes(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def cmd_reconstruct(args) -> int:
    if args.method not in METHODS:
        raise UsageError(f"unknown method {args.method!r}; valid methods: {', '.join(METHODS)}")
    meas = load_prm(_require_file(args.measurement, "measurement file"))
    run_cfg, pipeline_cfg, init_cfg, workers = _build_runtime(args, args.method)
    truth = load_png(_require_file(args.truth, "truth image")) if args.truth else None

    result = None
    if args.method == "hio":
        from .hio import run_hio
        from .init_stage import random_phase_start

        x0 = random_phase_start(meas, prng.split(init_cfg.master_seed, "hio-start"))
        recon, trace = run_hio(x0, meas, init_cfg.long_iters, run_cfg.hio_config())
    elif args.method == "init":
        cands = initialization_stage(meas, replace(init_cfg, keep=1), run_cfg.hio_config(), workers)
        recon = cands[0].image
    else:
        result = run_with_tta(meas, pipeline_cfg, run_cfg.tta, init_cfg=init_cfg,
                              workers=workers, truth=truth)
        recon = result.aggregate

    save_png(args.out, recon)
    if args.trace:
        if result is not None:
            _write_trace(args.trace, result)
        else:
            with open(args.trace, "w", newline="") as f:
                writer = csv.writer(f)
                writer.writerow(["transform", "chain", "iteration", "residual"])
                if args.method == "hio":
                    for i, res in enumerate(trace.residuals, start=1):
                        writer.writerow(["R0", 0, i, _fmt_float(float(res))])
    if args.dump_init:
        init_img = result.init_images[0] if result is not None else recon
        save_png(args.dump_init, init_img)
    if args.dump_iterates:
        if result is None or result.iterates is None:
            result = run_with_tta(meas, pipeline_cfg, "none", init_cfg=init_cfg,
                                  workers=workers, truth=truth) if result is None else result
        if result.iterates is None:
            from .pipeline import run_prnet

            result = run_prnet(meas, pipeline_cfg, init_cfg=init_cfg, workers=workers,
                               truth=truth, collect_iterates=True)
        _dump_iterates(args.dump_iterates, result)
    return 0


def cmd_evaluate(args) -> int:
    recon = load_png(_require_file(args.recon, "reconstruction"))
    truth = load_png(_require_file(args.truth, "truth image"))
    if recon.shape != truth.shape:
        raise UsageError(f"dimension mismatch: recon {recon.shape} vs truth {truth.shape}")
    if args.no_flip_resolve:
        report = MetricReport(psnr(truth, recon), ssim(truth, recon), False)
    else:
        _, report = resolve_conjugate_flip(recon, truth)
    print(f"{_fmt_float(report.psnr_db)},{_fmt_float(report.ssim)},"
          f"{'true' if report.resolved_flip else 'false'}")
    return 0


def cmd_benchmark(args) -> int:
    image_dir = _require_file(args.dir, "image directory")
    alphas = [float(v) for v in args.alphas.split(",") if v]
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in METHODS:
            raise UsageError(f"unknown method {m!r}; valid methods: {', '.join(METHODS)}")
    run_cfg, pipeline_cfg, init_cfg, workers = _build_runtime(args, methods[0])
    report = benchmark(image_dir, alphas, args.runs, methods, pipeline_cfg, init_cfg,
                       master_seed=run_cfg.master_seed, tta_mode=run_cfg.tta, workers=workers)
    out = Path(args.out)
    write_rows_csv(report, out)
    write_summary_csv(report, out.with_name(out.stem + "_summary.csv"))
    write_histogram_csv(report, out.with_name(out.stem + "_hist.csv"))
    print("method,alpha,n,mean_psnr_db,mean_ssim,mean_runtime_s")
    for s in summarize(report):
        print(f"{s['method']},{_fmt_float(s['alpha'])},{s['n']},{_fmt_float(s['mean_psnr_db'])},"
              f"{_fmt_float(s['mean_ssim'])},{_fmt_float(s['mean_runtime_s'])}")
    if report.any_skipped:
        for msg in report.skipped:
            print(f"skipped: {msg}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prforge",
                                     description="Fourier phase retrieval with stochastic refinement")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a noisy oversampled Fourier measurement")
    p.add_argument("--input", required=True, help="grayscale PNG ground truth")
    p.add_argument("--alpha", type=float, required=True, help="noise strength")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output .prm measurement file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="reconstruct an image from a measurement")
    p.add_argument("--measurement", required=True)
    p.add_argument("--method", required=True,
                   help="one of: " + ", ".join(METHODS))
    p.add_argument("--config", default=None, help="flat key=value config file")
    p.add_argument("--weights", default=None, help="PRWT weights archive for residual_cnn")
    p.add_argument("--tta", default=None, choices=TTA_MODES)
    p.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--truth", default=None, help="optional truth PNG for PSNR trace columns")
    p.add_argument("--out", required=True, help="output reconstruction PNG")
    p.add_argument("--trace", default=None, help="optional per-iteration trace CSV")
    p.add_argument("--dump-init", default=None, help="write the initialization-stage image as PNG")
    p.add_argument("--dump-iterates", default=None,
                   help="prefix for raw float64 dumps of the first chain's iterates")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("evaluate", help="PSNR/SSIM of a reconstruction against the truth")
    p.add_argument("--recon", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--no-flip-resolve", action="store_true",
                   help="skip conjugate-flip ambiguity resolution")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("benchmark", help="grid of images x noise levels x runs x methods")
    p.add_argument("--dir", required=True, help="directory of grayscale PNGs")
    p.add_argument("--alphas", default="2,3,4")
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--methods", default="hio,init,prnet-small")
    p.add_argument("--config", default=None)
    p.add_argument("--weights", default=None)
    p.add_argument("--tta", default=None, choices=TTA_MODES)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", required=True, help="output rows CSV (summary/histogram written alongside)")
    p.set_defaults(func=cmd_benchmark)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError, WeightsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 1
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
