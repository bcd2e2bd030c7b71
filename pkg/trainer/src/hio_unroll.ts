/**
 * Differentiable data-consistency block: K hybrid input-output
 * iterations against a blended measurement, with an exact backward pass
 * (constraint masks frozen per forward, as usual for unrolled training).
 *
 * Mirrors the engine's solver: the iterate lives on the 2H x 2W grid,
 * the phase factor of zero-magnitude bins is 1, support is the top-left
 * block, and the result is reported cropped.
 */

import { fft2 } from "./fft.js";

export interface UnrollConfig {
  h: number;
  w: number;
  K: number;
  beta: number;
}

interface IterState {
  gridRe: Float64Array; // input grid of this iteration
  cRe: Float64Array; // spectrum of the input grid
  cIm: Float64Array;
  r: Float64Array; // |C|
  blended: Float64Array; // y' at this outer step (shared, kept for clarity)
  p: Float64Array; // projected grid
  gamma: Uint8Array; // violation mask
}

export interface UnrollState {
  cfg: UnrollConfig;
  xMagRe: Float64Array; // spectrum of pad(x_i), reused for d|Ax|/dx
  xMagIm: Float64Array;
  xMag: Float64Array; // |A x_i|
  blended: Float64Array;
  lambda: number;
  y: Float64Array;
  iters: IterState[];
  zK: Float64Array; // cropped output
}

function pad(x: Float64Array, h: number, w: number): Float64Array {
  const out = new Float64Array(4 * h * w);
  for (let i = 0; i < h; i++) {
    for (let j = 0; j < w; j++) out[i * 2 * w + j] = x[i * w + j];
  }
  return out;
}

function crop(g: Float64Array, h: number, w: number): Float64Array {
  const out = new Float64Array(h * w);
  for (let i = 0; i < h; i++) {
    for (let j = 0; j < w; j++) out[i * w + j] = g[i * 2 * w + j];
  }
  return out;
}

function padAdjoint(dx: Float64Array, h: number, w: number): Float64Array {
  return pad(dx, h, w); // zero-extension is the adjoint of cropping
}

export function unrollForward(xI: Float64Array, y: Float64Array, lambda: number,
                              cfg: UnrollConfig): UnrollState {
  const { h, w, K, beta } = cfg;
  const gh = 2 * h, gw = 2 * w;
  const zeros = new Float64Array(gh * gw);
  const padded = pad(xI, h, w);
  const spec = fft2(padded, zeros, gh, gw);
  const xMag = new Float64Array(gh * gw);
  for (let k = 0; k < xMag.length; k++) xMag[k] = Math.hypot(spec.re[k], spec.im[k]);
  const blended = new Float64Array(gh * gw);
  for (let k = 0; k < blended.length; k++) blended[k] = lambda * y[k] + (1 - lambda) * xMag[k];

  let grid = padded;
  const iters: IterState[] = [];
  for (let it = 0; it < K; it++) {
    const c = fft2(grid, zeros, gh, gw);
    const r = new Float64Array(gh * gw);
    const gRe = new Float64Array(gh * gw);
    const gIm = new Float64Array(gh * gw);
    for (let k = 0; k < r.length; k++) {
      r[k] = Math.hypot(c.re[k], c.im[k]);
      const ur = r[k] === 0 ? 1 : c.re[k] / r[k];
      const ui = r[k] === 0 ? 0 : c.im[k] / r[k];
      gRe[k] = blended[k] * ur;
      gIm[k] = blended[k] * ui;
    }
    const proj = fft2(gRe, gIm, gh, gw, true);
    const p = proj.re;
    const gamma = new Uint8Array(gh * gw);
    const next = new Float64Array(gh * gw);
    for (let i = 0; i < gh; i++) {
      for (let j = 0; j < gw; j++) {
        const k = i * gw + j;
        const inside = i < h && j < w;
        const violates = inside ? p[k] < 0 : p[k] !== 0;
        gamma[k] = violates ? 1 : 0;
        next[k] = violates ? grid[k] - beta * p[k] : p[k];
      }
    }
    iters.push({ gridRe: grid, cRe: c.re, cIm: c.im, r, blended, p, gamma });
    grid = next;
  }
  return {
    cfg, xMagRe: spec.re, xMagIm: spec.im, xMag, blended, lambda, y, iters,
    zK: crop(grid, h, w),
  };
}

/**
 * Backward: given dL/dz^K, return dL/dx_i and dL/dlambda.
 */
export function unrollBackward(dzK: Float64Array, st: UnrollState): { dxI: Float64Array; dLambda: number } {
  const { h, w, K, beta } = st.cfg;
  const gh = 2 * h, gw = 2 * w;
  let dGrid = padAdjoint(dzK, h, w);
  const dBlended = new Float64Array(gh * gw);
  for (let it = K - 1; it >= 0; it--) {
    const s = st.iters[it];
    const dP = new Float64Array(gh * gw);
    const dGridPrev = new Float64Array(gh * gw);
    for (let k = 0; k < dGrid.length; k++) {
      if (s.gamma[k]) {
        dP[k] = -beta * dGrid[k];
        dGridPrev[k] = dGrid[k];
      } else {
        dP[k] = dGrid[k];
      }
    }
    // p = Re(IFFT(G)); adjoint: dG = FFT(dP embedded as real)
    const dG = fft2(dP, new Float64Array(gh * gw), gh, gw);
    const dCRe = new Float64Array(gh * gw);
    const dCIm = new Float64Array(gh * gw);
    for (let k = 0; k < gh * gw; k++) {
      const ur = s.r[k] === 0 ? 1 : s.cRe[k] / s.r[k];
      const ui = s.r[k] === 0 ? 0 : s.cIm[k] / s.r[k];
      dBlended[k] += ur * dG.re[k] + ui * dG.im[k];
      if (s.r[k] > 0) {
        const duRe = s.blended[k] * dG.re[k];
        const duIm = s.blended[k] * dG.im[k];
        const r3 = s.r[k] * s.r[k] * s.r[k];
        dCRe[k] += (s.cIm[k] * s.cIm[k] * duRe - s.cRe[k] * s.cIm[k] * duIm) / r3;
        dCIm[k] += (s.cRe[k] * s.cRe[k] * duIm - s.cRe[k] * s.cIm[k] * duRe) / r3;
      }
    }
    // C = FFT(grid); adjoint: dgrid += Re(IFFT(dC))
    const back = fft2(dCRe, dCIm, gh, gw, true);
    for (let k = 0; k < gh * gw; k++) dGridPrev[k] += back.re[k];
    dGrid = dGridPrev;
  }

  // blended = lambda*y + (1-lambda)*|A x_i|
  let dLambda = 0;
  const dMag = new Float64Array(gh * gw);
  for (let k = 0; k < gh * gw; k++) {
    dLambda += (st.y[k] - st.xMag[k]) * dBlended[k];
    dMag[k] = (1 - st.lambda) * dBlended[k];
  }
  // |A x|: d/dB = (B/r) dMag, then back through FFT and the padding
  const dBRe = new Float64Array(gh * gw);
  const dBIm = new Float64Array(gh * gw);
  for (let k = 0; k < gh * gw; k++) {
    if (st.xMag[k] > 0) {
      dBRe[k] = (st.xMagRe[k] / st.xMag[k]) * dMag[k];
      dBIm[k] = (st.xMagIm[k] / st.xMag[k]) * dMag[k];
    }
  }
  const backMag = fft2(dBRe, dBIm, gh, gw, true);
  const dxI = new Float64Array(h * w);
  for (let i = 0; i < h; i++) {
    for (let j = 0; j < w; j++) {
      // grid^0 = pad(x_i) contributes dGrid directly; the magnitude path adds backMag
      dxI[i * w + j] = dGrid[i * 2 * w + j] + backMag.re[i * 2 * w + j];
    }
  }
  return { dxI, dLambda };
}
