"""Acceptance gate: one test per release criterion, at pinned tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one verdict line
per criterion (name, pass/fail, elapsed time). The suite relies only on
the reference denoisers and a zero-weight archive, so it runs without any
trained model.
"""

import math
import time
from contextlib import contextmanager
from dataclasses import replace

import numpy as np
import pytest

from prforge import rng as prng
from prforge.cli import main
from prforge.d4 import ALL_TRANSFORMS, apply_d4
from prforge.denoise import GaussianDenoiser, IdentityDenoiser, score_from_denoiser
from prforge.fourier import FourierOp
from prforge.hio import HioConfig, run_hio
from prforge.image import save_png
from prforge.init_stage import InitConfig, initialization_stage
from prforge.metrics import resolve_conjugate_flip
from prforge.pipeline import (LambdaSchedule, PipelineConfig, blend_measurement,
                              langevin_update_eq15, noise_scale, prnet_step, run_prnet)
from prforge.tta import magnitude_permutation, run_with_tta

from .conftest import desk_images, natural_crop
from .test_denoiser import GaussianPriorMMSE
from .test_fourier import dense_forward_matrix


@contextmanager
def criterion(name: str, budget_s: float):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name} ({time.perf_counter() - t0:.1f}s)")
        raise
    elapsed = time.perf_counter() - t0
    verdict = "PASS" if elapsed < budget_s else "FAIL"
    print(f"[{verdict}] {name} ({elapsed:.1f}s, budget {budget_s:.0f}s)")
    assert elapsed < budget_s, f"{name}: runtime {elapsed:.1f}s exceeds budget {budget_s}s"


def test_operator_correctness():
    with criterion("operator correctness (unitarity + dense oracle)", 5.0):
        rng = np.random.default_rng(0)
        for size in (8, 16, 32, 64):
            op = FourierOp(size, size)
            for _ in range(25):
                x = rng.uniform(0, 255, (size, size))
                field = op.apply(x)
                assert abs(np.linalg.norm(field) / np.linalg.norm(x) - 1.0) < 1e-10
                assert np.max(np.abs(op.pseudoinverse(field) - x)) < 1e-10
        op4 = FourierOp(4, 4)
        dense = dense_forward_matrix(op4)
        gram = dense.conj().T @ dense
        assert np.max(np.abs(gram - np.eye(16))) < 1e-10
        x = rng.uniform(0, 255, (4, 4))
        assert np.max(np.abs(op4.apply(x).ravel() - dense @ x.ravel())) < 1e-10


def test_gradient_fidelity():
    with criterion("gradient fidelity (subgradient vs central differences)", 10.0):
        rng = np.random.default_rng(1)
        op = FourierOp(8, 8)
        checked = 0
        while checked < 50:
            truth = rng.uniform(20, 235, (8, 8))
            meas = op.simulate(truth, 1.0, prng.split(checked, "grad-acc"))
            x = truth + rng.normal(0, 5, truth.shape)
            if np.min(np.abs(op.apply(x))) <= 0.1:
                continue  # well-conditioned points only
            analytic = 0.5 * op.residual_gradient(x, meas)
            h = 1e-4
            fd = np.zeros_like(x)
            for idx in np.ndindex(x.shape):
                xp = x.copy()
                xp[idx] += h
                xm = x.copy()
                xm[idx] -= h
                fd[idx] = 0.5 * (op.residual(xp, meas) - op.residual(xm, meas)) / (2 * h)
            rel = np.linalg.norm(analytic - fd) / np.linalg.norm(fd)
            assert rel < 1e-5, f"point {checked}: relative error {rel:.2e}"
            checked += 1


def test_hio_fixed_point_and_recovery():
    with criterion("HIO fixed point + multi-start recovery >= 30 dB", 300.0):
        rng = np.random.default_rng(2)
        x = rng.uniform(0, 255, (16, 16))
        op = FourierOp.for_image(x)
        meas = op.simulate(x, 0.0)
        _, trace = run_hio(x, meas, 100)
        energy = float(np.sum(meas.magnitudes**2))
        assert np.all(trace.residuals <= 1e-12 * energy)

        crops = desk_images(5)
        cfg = InitConfig(num_starts=50, short_iters=50, long_iters=1000, keep=1)
        psnrs = []
        for crop in crops:
            op = FourierOp.for_image(crop)
            noiseless = op.simulate(crop, 0.0)
            for seed in range(20):
                cands = initialization_stage(noiseless, replace(cfg, master_seed=seed))
                _, report = resolve_conjugate_flip(cands[0].image, crop)
                psnrs.append(report.psnr_db)
        median = float(np.median(psnrs))
        print(f"  recovery median PSNR over {len(psnrs)} runs: {median:.1f} dB")
        assert median >= 30.0


def test_langevin_algebra():
    with criterion("Langevin algebra (reductions + injected noise std)", 60.0):
        rng = np.random.default_rng(3)
        x = rng.uniform(0, 255, (8, 8))
        op = FourierOp.for_image(x)
        meas = op.simulate(x, 0.0)
        probe = x + rng.normal(0, 8, x.shape)

        class ZeroRng:
            def standard_normal(self, shape):
                return np.zeros(shape)

        from prforge.hio import measurement_projection

        lam1 = langevin_update_eq15(probe, meas, 1.0, 2.0, IdentityDenoiser(), 1.0, ZeroRng())
        assert np.max(np.abs(lam1 - measurement_projection(probe, meas.magnitudes))) < 1e-12
        lam0 = langevin_update_eq15(probe, meas, 0.0, 2.0, IdentityDenoiser(), 1.0, None)
        assert np.max(np.abs(lam0 - probe)) < 1e-12

        # injected-noise std over >= 1e5 scalar draws
        alpha, lam = 3.0, 0.37
        small = rng.uniform(0, 255, (4, 4))
        sop = FourierOp.for_image(small)
        smeas = sop.simulate(small, 0.0)
        cfg = PipelineConfig(T=2, K=1, denoiser=IdentityDenoiser(), alpha=alpha,
                             schedule=LambdaSchedule(np.array([lam, lam])))
        blended = blend_measurement(smeas.magnitudes, small, lam, sop)
        z, _ = run_hio(small, blended, 1, cfg.hio_config())
        draws = 6500  # x 16 pixels = 104k samples
        acc = np.empty(draws * small.size)
        for d in range(draws):
            _, x_next = prnet_step(small, smeas, 1, cfg, prng.split(d, "std-mc"))
            acc[d * small.size:(d + 1) * small.size] = (x_next - z).ravel()
        got = float(acc.std())
        expect = noise_scale(alpha, lam)
        print(f"  injected std {got:.5f} vs formula {expect:.5f}")
        assert abs(got - expect) / expect < 0.03


def test_score_oracle():
    with criterion("score oracle (Gaussian conjugacy, 12-point grid)", 1.0):
        model = GaussianPriorMMSE(mu=10.0, tau2=4.0)
        for v in (0.0, 5.0, 10.0, 15.0):
            for sigma in (0.5, 1.0, 2.0):
                got = score_from_denoiser(model, np.full((2, 2), v), sigma)
                expect = (10.0 - v) / (4.0 + sigma * sigma)
                assert np.max(np.abs(got - expect)) < 1e-12


def test_d4_tta_equivariance():
    with criterion("D4 magnitude permutations + TTA-d4 equals base", 60.0):
        rng = np.random.default_rng(4)
        for size in ((4, 4), (16, 16)):
            x = rng.uniform(0, 255, size)
            op = FourierOp.for_image(x)
            base = np.abs(op.apply(x))
            for t in ALL_TRANSFORMS:
                lhs = np.abs(op.apply(apply_d4(x, t)))
                assert np.max(np.abs(lhs - magnitude_permutation(base, t))) < 1e-10

        x = rng.uniform(0, 255, (16, 16))
        op = FourierOp.for_image(x)
        meas = op.simulate(x, 0.0)
        cfg = PipelineConfig(T=6, K=3, chains=1, master_seed=5, denoiser=IdentityDenoiser())
        icfg = InitConfig(num_starts=6, short_iters=15, long_iters=80, keep=1, master_seed=5)
        base = run_prnet(meas, cfg, init_cfg=icfg)
        d4 = run_with_tta(meas, cfg, "d4", init_cfg=icfg)
        assert len(d4.images) == 8
        diff = np.max(np.abs(d4.aggregate - base.aggregate))
        print(f"  TTA-d4 vs base max abs diff: {diff:.2e}")
        assert diff < 1e-10


def test_ensemble_property():
    with criterion("ensemble: Jensen + large >= small on >= 70% at alpha=3", 600.0):
        from .conftest import DESK_CROPS

        den = GaussianDenoiser()
        wins = 0
        for i, spec in enumerate(DESK_CROPS):
            crop = natural_crop(spec)
            op = FourierOp.for_image(crop)
            seed = prng.seed_from("desk", spec[0], spec[1], spec[2], 3.0)
            meas = op.simulate(crop, 3.0, prng.split(seed, "measurement"), seed=seed)
            small_cfg = PipelineConfig(T=18, K=5, chains=1, master_seed=seed, denoiser=den)
            small_init = InitConfig(num_starts=50, short_iters=50, long_iters=1000, keep=1,
                                    master_seed=seed)
            large_cfg = PipelineConfig(T=18, K=5, chains=10, master_seed=seed, denoiser=den)
            large_init = InitConfig(num_starts=100, short_iters=50, long_iters=1000, keep=10,
                                    master_seed=seed)
            small = run_prnet(meas, small_cfg, init_cfg=small_init)
            large = run_prnet(meas, large_cfg, init_cfg=large_init)

            agg_mse = float(np.mean((large.aggregate - crop) ** 2))
            chain_mses = [float(np.mean((im - crop) ** 2)) for im in large.images]
            assert agg_mse <= np.mean(chain_mses) + 1e-12  # Jensen, every instance

            _, rep_small = resolve_conjugate_flip(small.aggregate, crop)
            _, rep_large = resolve_conjugate_flip(large.aggregate, crop)
            win = rep_large.psnr_db >= rep_small.psnr_db
            wins += win
            print(f"  image {i}: small {rep_small.psnr_db:.2f} dB, "
                  f"large {rep_large.psnr_db:.2f} dB {'+' if win else '-'}")
        print(f"  large wins {wins}/10")
        assert wins >= 7


def test_determinism_end_to_end(tmp_path):
    with criterion("determinism: byte-identical runs, workers 1 vs 4", 120.0):
        truth = natural_crop(("camera", 133, 184), size=16)
        truth_png = tmp_path / "truth.png"
        save_png(truth_png, truth)
        cfg = tmp_path / "cfg.toml"
        cfg.write_text('denoiser = "gaussian"\nT = 5\nK = 3\nchains = 3\n'
                       "num_starts = 6\nshort_iters = 10\nlong_iters = 50\n")

        artifacts = []
        for run, workers in (("r1", "1"), ("r2", "1"), ("r3", "4")):
            meas = tmp_path / f"{run}.prm"
            recon = tmp_path / f"{run}.png"
            trace = tmp_path / f"{run}.csv"
            assert main(["simulate", "--input", str(truth_png), "--alpha", "2",
                         "--seed", "17", "--out", str(meas)]) == 0
            assert main(["reconstruct", "--measurement", str(meas), "--method", "prnet-small",
                         "--config", str(cfg), "--seed", "17", "--workers", workers,
                         "--out", str(recon), "--trace", str(trace)]) == 0
            artifacts.append((meas.read_bytes(), recon.read_bytes(), trace.read_bytes()))
        assert artifacts[0] == artifacts[1], "repeated invocation differs"
        assert artifacts[0] == artifacts[2], "worker count changed the result"


def test_noise_model_statistics():
    with criterion("noise-model variance within 5% over 1e5 draws", 30.0):
        x = np.random.default_rng(6).uniform(10, 255, (8, 8))
        op = FourierOp.for_image(x)
        alpha = 3.0
        clean = np.abs(op.apply(x)) ** 2
        stream = prng.split(0, "acc-variance")
        draws = 100_000
        acc = np.zeros_like(clean)
        acc2 = np.zeros_like(clean)
        for _ in range(draws):
            w = op.simulate(x, alpha, stream).intensities - clean
            acc += w
            acc2 += w * w
        var = acc2 / draws - (acc / draws) ** 2
        expected = alpha**2 * clean
        mask = np.abs(op.apply(x)) > 1e-9
        rel = np.abs(var[mask] - expected[mask]) / expected[mask]
        print(f"  worst per-element variance deviation: {rel.max() * 100:.2f}%")
        assert rel.max() < 0.05
