/**
 * Measurement-weight schedule and the noise-level rule shared with the
 * reconstruction engine: lambda decreases log-linearly from 1 to 0.01
 * over T steps, and the denoiser sees sigma_i = alpha*sqrt(lambda_{i-1})
 * / sqrt(2) with lambda_0 := 1.
 */

export function defaultSchedule(T: number, lambdaMax = 1.0, lambdaMin = 0.01): number[] {
  if (T < 1) throw new Error("T must be >= 1");
  if (!(0 < lambdaMin && lambdaMin <= lambdaMax && lambdaMax <= 1)) {
    throw new Error(`invalid schedule bounds (${lambdaMax}, ${lambdaMin})`);
  }
  if (T === 1) return [lambdaMax];
  const out: number[] = [];
  const l0 = Math.log(lambdaMax);
  const l1 = Math.log(lambdaMin);
  for (let i = 0; i < T; i++) out.push(Math.exp(l0 + ((l1 - l0) * i) / (T - 1)));
  out[0] = lambdaMax;
  out[T - 1] = lambdaMin;
  return out;
}

export function noiseScale(alpha: number, lambda: number): number {
  return (alpha * Math.sqrt(lambda)) / Math.SQRT2;
}

/** Denoiser input noise level at outer step i (1-based). */
export function sigmaForStep(schedule: number[], alpha: number, i: number): number {
  if (i < 1 || i > schedule.length) throw new Error(`step ${i} outside 1..${schedule.length}`);
  if (i === 1) return noiseScale(alpha, 1.0);
  return noiseScale(alpha, schedule[i - 2]);
}
