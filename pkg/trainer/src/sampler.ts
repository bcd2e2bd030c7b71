/**
 * Progressive iteration sampler: a truncated discrete Gaussian over
 * steps 1..T with std T/4 whose mean moves linearly from 1 to T as
 * training advances, so early epochs concentrate on early pipeline
 * iterations and late epochs on late ones.
 */

import { Rng } from "./rng.js";

export class ProgressiveSampler {
  readonly T: number;
  readonly epochs: number;

  constructor(T: number, epochs: number) {
    if (T < 1 || epochs < 1) throw new Error("T and epochs must be >= 1");
    this.T = T;
    this.epochs = epochs;
  }

  targetMean(epoch: number): number {
    if (this.epochs === 1) return (1 + this.T) / 2;
    const frac = Math.min(Math.max(epoch / (this.epochs - 1), 0), 1);
    return 1 + frac * (this.T - 1);
  }

  /** Probability table over i = 1..T for one epoch. */
  distribution(epoch: number): number[] {
    const mu = this.targetMean(epoch);
    const std = this.T / 4;
    const weights: number[] = [];
    let total = 0;
    for (let i = 1; i <= this.T; i++) {
      const z = (i - mu) / std;
      const wgt = Math.exp(-0.5 * z * z);
      weights.push(wgt);
      total += wgt;
    }
    return weights.map((w) => w / total);
  }

  mean(epoch: number): number {
    return this.distribution(epoch).reduce((acc, p, idx) => acc + p * (idx + 1), 0);
  }

  sample(epoch: number, rng: Rng): number {
    const dist = this.distribution(epoch);
    let u = rng.next();
    for (let i = 0; i < dist.length; i++) {
      u -= dist[i];
      if (u < 0) return i + 1;
    }
    return this.T;
  }
}
