/**
 * Progressive training of the residual denoiser.
 *
 * Loss per sampled pair (x'_{i-1}, x, i), both terms mean-squared:
 * mu1 * |D(x'_{i-1}, sigma_i) - x|^2 + mu2 * |z_i^(K) - x|^2, where the
 * second term unrolls K data-consistency iterations from the denoised
 * estimate and is active only for mu2 > 0. The step index is drawn from
 * the progressive sampler, whose mean advances with the epoch.
 */

import { readdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { Adam } from "./adam.js";
import { ResidualCnn } from "./model.js";
import { GrayImage, readGrayPng } from "./png.js";
import { PairContext, PipelineRunner, TrainPair, fastPair, pipelineIterates } from "./pairs.js";
import { exportWeights } from "./prwt.js";
import { Rng } from "./rng.js";
import { ProgressiveSampler } from "./sampler.js";
import { defaultSchedule, sigmaForStep } from "./schedule.js";
import { fft2, isPow2 } from "./fft.js";
import { unrollBackward, unrollForward } from "./hio_unroll.js";

/**
 * Images are stored 0..255 but the network is optimized on inputs divided
 * by this scale; the exported archive folds the scaling into its first
 * and last layers so the engine still feeds raw pixels (see
 * ResidualCnn.scaleFolded).
 */
export const PIXEL_SCALE = 255.0;

/** The sigma channel is optimized at roughly unit scale as well. */
export const SIGMA_SCALE = 2.5;

export interface TrainConfig {
  epochs: number;
  batchSize: number;
  lr: number;
  augment: boolean; // random dihedral flips of the clean crop per sample
  mu1: number;
  mu2: number;
  T: number;
  K: number;
  beta: number;
  alpha: number;
  datasetDir: string;
  seed: number;
  exportPath: string;
  mode: "fast" | "pipeline";
  engine: string[]; // CLI argv prefix for pipeline mode
  trainLambda: boolean;
  lambdaLr: number;
  holdoutFraction: number;
  logPath: string | null;
}

export function defaultTrainConfig(datasetDir: string, exportPath: string): TrainConfig {
  return {
    epochs: 12, batchSize: 8, lr: 1e-3, augment: true, mu1: 1.0, mu2: 0.0, T: 18, K: 5,
    beta: 0.9, alpha: 3.0, datasetDir, seed: 0, exportPath, mode: "fast",
    engine: ["prforge"], trainLambda: false, lambdaLr: 1e-3, holdoutFraction: 0.1,
    logPath: null,
  };
}

export interface Dataset {
  train: GrayImage[];
  holdout: GrayImage[];
  trainPaths: string[];
}

export function loadDataset(cfg: TrainConfig): Dataset {
  if (!(cfg.mu1 > 0)) throw new Error("mu1 must be positive");
  if (cfg.mu2 < 0) throw new Error("mu2 must be non-negative");
  const names = readdirSync(cfg.datasetDir).filter((n) => n.endsWith(".png")).sort();
  if (names.length === 0) throw new Error(`no .png files in ${cfg.datasetDir}`);
  const images = names.map((n) => readGrayPng(join(cfg.datasetDir, n)));
  const first = images[0];
  for (const im of images) {
    if (im.width !== first.width || im.height !== first.height) {
      throw new Error("dataset images must share dimensions");
    }
  }
  if (cfg.mu2 > 0 && (!isPow2(first.height) || !isPow2(first.width))) {
    throw new Error("mu2 > 0 requires power-of-two image dims (FFT unroll)");
  }
  const order = [...images.keys()];
  new Rng(cfg.seed, "holdout-split").shuffle(order);
  const nHold = Math.max(1, Math.round(cfg.holdoutFraction * images.length));
  const holdIdx = new Set(order.slice(0, nHold));
  return {
    train: images.filter((_, i) => !holdIdx.has(i)),
    holdout: images.filter((_, i) => holdIdx.has(i)),
    trainPaths: names.filter((_, i) => !holdIdx.has(i)).map((n) => join(cfg.datasetDir, n)),
  };
}

interface EpochStats {
  epoch: number;
  meanLoss: number;
  samplerMean: number;
}

export interface TrainResult {
  /** Raw-scale network, as exported (scaling folded in). */
  model: ResidualCnn;
  lambdas: number[];
  stats: EpochStats[];
  holdoutIdentityMse: number;
  holdoutModelMse: number;
}

/** Mean squared denoising error on held-out crops at one noise level. */
export function holdoutMse(model: ResidualCnn | null, holdout: GrayImage[], sigma: number,
                           seed: number | string): number {
  const rng = new Rng(seed, "holdout-noise");
  let total = 0;
  let count = 0;
  for (const im of holdout) {
    const noisy = new Float64Array(im.pixels.length);
    for (let k = 0; k < noisy.length; k++) noisy[k] = im.pixels[k] + sigma * rng.gauss();
    const out = model ? model.denoise(noisy, sigma, im.height, im.width) : noisy;
    for (let k = 0; k < out.length; k++) {
      const d = out[k] - im.pixels[k];
      total += d * d;
    }
    count += out.length;
  }
  return total / count;
}

export function train(cfg: TrainConfig): TrainResult {
  const data = loadDataset(cfg);
  const rng = new Rng(cfg.seed, "train");
  const model = ResidualCnn.heInit(new Rng(cfg.seed, "init"));
  const opt = new Adam(model.params, cfg.lr);
  const sampler = new ProgressiveSampler(cfg.T, cfg.epochs);
  const lambdas = defaultSchedule(cfg.T);
  const h = data.train[0].height;
  const w = data.train[0].width;
  const ctx: PairContext = { schedule: lambdas, alpha: cfg.alpha, h, w };

  const stats: EpochStats[] = [];
  const log: Record<string, unknown> = {
    mode: cfg.mode, epochs: cfg.epochs, alpha: cfg.alpha, T: cfg.T, K: cfg.K,
    mu1: cfg.mu1, mu2: cfg.mu2, seed: cfg.seed, dataset: cfg.datasetDir,
    trainImages: data.train.length, holdoutImages: data.holdout.length,
  };

  // pipeline-mode iterates are refreshed once per epoch with the weights
  // exported at the previous epoch's end
  let epochIterates: Float64Array[][] | null = null;

  for (let epoch = 0; epoch < cfg.epochs; epoch++) {
    // constant rate for the first half, cosine decay to lr/20 over the second
    const progress = cfg.epochs > 1 ? epoch / (cfg.epochs - 1) : 1;
    const tail = Math.max(0, (progress - 0.5) / 0.5);
    opt.setLearningRate(cfg.lr * (0.05 + 0.95 * 0.5 * (1 + Math.cos(Math.PI * tail))));
    if (cfg.mode === "pipeline") {
      exportWeights(model.scaleFolded(PIXEL_SCALE, SIGMA_SCALE), lambdas, cfg.exportPath);
      const runner: PipelineRunner = { engine: cfg.engine, weightsPath: cfg.exportPath, seed: cfg.seed + epoch };
      epochIterates = data.trainPaths.map((p) => pipelineIterates(p, ctx, runner));
    }
    const order = [...data.train.keys()];
    rng.shuffle(order);
    let lossSum = 0;
    let lossCount = 0;
    for (let start = 0; start < order.length; start += cfg.batchSize) {
      const batch = order.slice(start, start + cfg.batchSize);
      const grads = model.zeroGrads();
      const dLambdaAcc = new Float64Array(cfg.T);
      let batchLoss = 0;
      for (const idx of batch) {
        let clean = data.train[idx].pixels;
        if (cfg.augment) clean = dihedral(clean, h, w, rng.int(h === w ? 8 : 4));
        const step = sampler.sample(epoch, rng);
        let pair: TrainPair;
        if (cfg.mode === "pipeline" && epochIterates) {
          const input = epochIterates[idx][step - 1];
          pair = { input, clean, sigma: sigmaForStep(lambdas, cfg.alpha, step), step };
        } else {
          pair = fastPair(clean, step, ctx, rng);
        }
        const n = h * w;
        const uInput = new Float64Array(n);
        const uClean = new Float64Array(n);
        for (let k = 0; k < n; k++) {
          uInput[k] = pair.input[k] / PIXEL_SCALE;
          uClean[k] = clean[k] / PIXEL_SCALE;
        }
        const uSigma = pair.sigma / SIGMA_SCALE;
        const state = model.forwardTraining(uInput, uSigma, h, w);
        const denoised = new Float64Array(n); // normalized units
        for (let k = 0; k < n; k++) denoised[k] = uInput[k] - state.residual[k];

        const dDenoised = new Float64Array(n);
        let loss = 0;
        for (let k = 0; k < n; k++) {
          const d = denoised[k] - uClean[k];
          loss += cfg.mu1 * d * d;
          dDenoised[k] = (2 * cfg.mu1 * d) / n;
        }
        loss /= n;

        if (cfg.mu2 > 0) {
          const lam = lambdas[pair.step - 1];
          const y = measurementMagnitudes(clean, h, w);
          const denoisedRaw = new Float64Array(n);
          for (let k = 0; k < n; k++) denoisedRaw[k] = denoised[k] * PIXEL_SCALE;
          const un = unrollForward(denoisedRaw, y, lam, { h, w, K: cfg.K, beta: cfg.beta });
          let l2 = 0;
          const dz = new Float64Array(n);
          const s2 = PIXEL_SCALE * PIXEL_SCALE;
          for (let k = 0; k < n; k++) {
            const d = un.zK[k] - clean[k];
            l2 += (d * d) / s2;
            dz[k] = (2 * cfg.mu2 * d) / (n * s2);
          }
          loss += (cfg.mu2 * l2) / n;
          const back = unrollBackward(dz, un);
          for (let k = 0; k < n; k++) dDenoised[k] += back.dxI[k] * PIXEL_SCALE;
          dLambdaAcc[pair.step - 1] += back.dLambda;
        }

        if (!Number.isFinite(loss)) {
          throw new Error(`training diverged (loss not finite) at epoch ${epoch}, step ${pair.step}`);
        }
        batchLoss += loss;
        // denoised = input - residual, so d(loss)/d(residual) = -dDenoised
        const dResidual = new Float64Array(n);
        for (let k = 0; k < n; k++) dResidual[k] = -dDenoised[k];
        model.backward(dResidual, state, h, w, grads);
      }
      const scale = 1 / batch.length;
      let sq = 0;
      for (const g of grads) {
        for (let k = 0; k < g.weight.length; k++) { g.weight[k] *= scale; sq += g.weight[k] ** 2; }
        for (let k = 0; k < g.bias.length; k++) { g.bias[k] *= scale; sq += g.bias[k] ** 2; }
      }
      const norm = Math.sqrt(sq);
      if (norm > 5.0) { // safety clip against rare outlier batches
        const clip = 5.0 / norm;
        for (const g of grads) {
          for (let k = 0; k < g.weight.length; k++) g.weight[k] *= clip;
          for (let k = 0; k < g.bias.length; k++) g.bias[k] *= clip;
        }
      }
      opt.step(grads);
      if (cfg.trainLambda && cfg.mu2 > 0) {
        for (let i = 0; i < cfg.T; i++) {
          lambdas[i] = Math.min(1.0, Math.max(1e-4, lambdas[i] - cfg.lambdaLr * dLambdaAcc[i] * scale));
        }
      }
      lossSum += batchLoss;
      lossCount += batch.length;
    }
    stats.push({ epoch, meanLoss: lossSum / lossCount, samplerMean: sampler.mean(epoch) });
  }

  const exportModel = model.scaleFolded(PIXEL_SCALE, SIGMA_SCALE);
  const midSigma = sigmaForStep(lambdas, cfg.alpha, Math.ceil(cfg.T / 2));
  const identityMse = holdoutMse(null, data.holdout, midSigma, cfg.seed);
  const modelMse = holdoutMse(exportModel, data.holdout, midSigma, cfg.seed);
  exportWeights(exportModel, lambdas, cfg.exportPath);

  if (cfg.logPath) {
    log.stats = stats;
    log.holdoutIdentityMse = identityMse;
    log.holdoutModelMse = modelMse;
    log.midSigma = midSigma;
    writeFileSync(cfg.logPath, JSON.stringify(log, null, 2) + "\n");
  }
  return { model: exportModel, lambdas, stats, holdoutIdentityMse: identityMse, holdoutModelMse: modelMse };
}

/** Index-permutation symmetries of the square (flips; rotations when square). */
export function dihedral(x: Float64Array, h: number, w: number, code: number): Float64Array {
  if (code === 0) return x;
  const flipRows = (code & 1) !== 0;
  const flipCols = (code & 2) !== 0;
  const transpose = (code & 4) !== 0;
  const out = new Float64Array(x.length);
  for (let i = 0; i < h; i++) {
    const si = flipRows ? h - 1 - i : i;
    for (let j = 0; j < w; j++) {
      const sj = flipCols ? w - 1 - j : j;
      if (transpose) out[j * h + i] = x[si * w + sj];
      else out[i * w + j] = x[si * w + sj];
    }
  }
  return out;
}

/** |A x| for the clean image: the noiseless blended-measurement anchor. */
export function measurementMagnitudes(x: Float64Array, h: number, w: number): Float64Array {
  const gh = 2 * h, gw = 2 * w;
  const grid = new Float64Array(gh * gw);
  for (let i = 0; i < h; i++) {
    for (let j = 0; j < w; j++) grid[i * gw + j] = x[i * w + j];
  }
  const spec = fft2(grid, new Float64Array(grid.length), gh, gw);
  const mag = new Float64Array(gh * gw);
  for (let k = 0; k < mag.length; k++) mag[k] = Math.hypot(spec.re[k], spec.im[k]);
  return mag;
}
