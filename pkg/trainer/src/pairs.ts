/**
 * Training-pair synthesis: for a sampled pipeline step i, produce the
 * iterate x'_i the denoiser would see, paired with the clean image.
 *
 * Fast mode perturbs the clean image directly with Gaussian noise at the
 * schedule's sigma_i. Pipeline mode shells out to the reconstruction
 * engine's CLI with the current exported weights and reads back its
 * per-step iterate dumps, so pairs reflect the actual outputs of
 * previous iterations.
 */

import { spawnSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { Rng } from "./rng.js";
import { noiseScale, sigmaForStep } from "./schedule.js";

export interface TrainPair {
  input: Float64Array; // x'_{i-1}: what the denoiser sees at step i
  clean: Float64Array;
  sigma: number;
  step: number;
}

export interface PairContext {
  schedule: number[];
  alpha: number;
  h: number;
  w: number;
}

/** Fast mode: x'_{i-1} = x + sigma_i * eps. */
export function fastPair(clean: Float64Array, step: number, ctx: PairContext, rng: Rng): TrainPair {
  const sigma = sigmaForStep(ctx.schedule, ctx.alpha, step);
  const input = new Float64Array(clean.length);
  for (let k = 0; k < clean.length; k++) input[k] = clean[k] + sigma * rng.gauss();
  return { input, clean, sigma, step };
}

export interface PipelineRunner {
  /** Engine CLI argv prefix, e.g. ["prforge"] or ["python", "-m", "prforge.cli"]. */
  engine: string[];
  weightsPath: string | null; // current exported weights; null = gaussian reference
  seed: number;
}

/**
 * Pipeline mode: run the engine once per (image, seed) and keep all T
 * iterate dumps, so successive steps reuse one subprocess call.
 */
export function pipelineIterates(imagePath: string, ctx: PairContext,
                                 runner: PipelineRunner): Float64Array[] {
  const work = mkdtempSync(join(tmpdir(), "prforge-pairs-"));
  try {
    const measPath = join(work, "m.prm");
    run(runner.engine.concat([
      "simulate", "--input", imagePath, "--alpha", String(ctx.alpha),
      "--seed", String(runner.seed), "--out", measPath,
    ]));
    const cfgPath = join(work, "cfg.toml");
    writeConfig(cfgPath, ctx, runner.weightsPath);
    const prefix = join(work, "it");
    const args = [
      "reconstruct", "--measurement", measPath, "--method", "prnet-small",
      "--config", cfgPath, "--seed", String(runner.seed),
      "--out", join(work, "r.png"), "--dump-iterates", prefix,
    ];
    if (runner.weightsPath) args.push("--weights", runner.weightsPath);
    run(runner.engine.concat(args));
    const iterates: Float64Array[] = [];
    for (let i = 0; existsSync(`${prefix}_${String(i).padStart(3, "0")}.f64`); i++) {
      const buf = readFileSync(`${prefix}_${String(i).padStart(3, "0")}.f64`);
      const arr = new Float64Array(ctx.h * ctx.w);
      for (let k = 0; k < arr.length; k++) arr[k] = buf.readDoubleLE(8 * k);
      iterates.push(arr);
    }
    if (iterates.length !== ctx.schedule.length) {
      throw new Error(`expected ${ctx.schedule.length} iterate dumps, found ${iterates.length}`);
    }
    return iterates;
  } finally {
    rmSync(work, { recursive: true, force: true });
  }
}

function writeConfig(path: string, ctx: PairContext, weightsPath: string | null): void {
  const lines = [
    `T = ${ctx.schedule.length}`,
    `alpha = ${ctx.alpha}`,
    `denoiser = "${weightsPath ? "residual_cnn" : "gaussian"}"`,
  ];
  writeFileSync(path, lines.join("\n") + "\n");
}

function run(argv: string[]): void {
  const proc = spawnSync(argv[0], argv.slice(1), { encoding: "utf8" });
  if (proc.status !== 0) {
    throw new Error(`engine call failed (${argv.join(" ")}): ${proc.stderr || proc.stdout}`);
  }
}
