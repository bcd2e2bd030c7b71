/**
 * 3x3 cross-correlation with reflect padding, forward and backward.
 * Plain Float64Array planes in CHW order; nothing clever, just tight
 * loops. The backward pass returns exact gradients for input, weight,
 * and bias (checked against finite differences in the tests).
 */

export interface ConvParams {
  cin: number;
  cout: number;
  weight: Float64Array; // (cout, cin, 3, 3)
  bias: Float64Array;   // (cout)
}

export function reflectPad(x: Float64Array, c: number, h: number, w: number): Float64Array {
  const hp = h + 2, wp = w + 2;
  const out = new Float64Array(c * hp * wp);
  for (let ci = 0; ci < c; ci++) {
    const src = ci * h * w;
    const dst = ci * hp * wp;
    for (let i = -1; i <= h; i++) {
      // whole-sample reflection: -1 -> 1, h -> h-2
      const si = i < 0 ? -i : i >= h ? 2 * h - 2 - i : i;
      for (let j = -1; j <= w; j++) {
        const sj = j < 0 ? -j : j >= w ? 2 * w - 2 - j : j;
        out[dst + (i + 1) * wp + (j + 1)] = x[src + si * w + sj];
      }
    }
  }
  return out;
}

/** Scatter-add the adjoint of reflect padding. */
function reflectPadBackward(gp: Float64Array, c: number, h: number, w: number): Float64Array {
  const hp = h + 2, wp = w + 2;
  const out = new Float64Array(c * h * w);
  for (let ci = 0; ci < c; ci++) {
    const src = ci * hp * wp;
    const dst = ci * h * w;
    for (let i = -1; i <= h; i++) {
      const si = i < 0 ? -i : i >= h ? 2 * h - 2 - i : i;
      for (let j = -1; j <= w; j++) {
        const sj = j < 0 ? -j : j >= w ? 2 * w - 2 - j : j;
        out[dst + si * w + sj] += gp[src + (i + 1) * wp + (j + 1)];
      }
    }
  }
  return out;
}

export function convForward(x: Float64Array, h: number, w: number, p: ConvParams,
                            relu: boolean): { out: Float64Array; padded: Float64Array } {
  const { cin, cout, weight, bias } = p;
  const padded = reflectPad(x, cin, h, w);
  const hp = h + 2, wp = w + 2;
  const out = new Float64Array(cout * h * w);
  for (let co = 0; co < cout; co++) {
    const plane = co * h * w;
    out.fill(bias[co], plane, plane + h * w);
    for (let ci = 0; ci < cin; ci++) {
      const ch = ci * hp * wp;
      const wb = (co * cin + ci) * 9;
      const w00 = weight[wb], w01 = weight[wb + 1], w02 = weight[wb + 2];
      const w10 = weight[wb + 3], w11 = weight[wb + 4], w12 = weight[wb + 5];
      const w20 = weight[wb + 6], w21 = weight[wb + 7], w22 = weight[wb + 8];
      for (let i = 0; i < h; i++) {
        const r0 = ch + i * wp, r1 = r0 + wp, r2 = r1 + wp;
        const ob = plane + i * w;
        for (let j = 0; j < w; j++) {
          out[ob + j] +=
            w00 * padded[r0 + j] + w01 * padded[r0 + j + 1] + w02 * padded[r0 + j + 2] +
            w10 * padded[r1 + j] + w11 * padded[r1 + j + 1] + w12 * padded[r1 + j + 2] +
            w20 * padded[r2 + j] + w21 * padded[r2 + j + 1] + w22 * padded[r2 + j + 2];
        }
      }
    }
  }
  if (relu) {
    for (let k = 0; k < out.length; k++) if (out[k] < 0) out[k] = 0;
  }
  return { out, padded };
}

export interface ConvGrads {
  gradInput: Float64Array;
  gradWeight: Float64Array;
  gradBias: Float64Array;
}

/**
 * Backward pass. `gradOut` is dL/d(out) AFTER the relu mask has been
 * applied by the caller (see maskReluGrad); `padded` is the forward
 * padded input.
 */
export function convBackward(gradOut: Float64Array, padded: Float64Array,
                             h: number, w: number, p: ConvParams): ConvGrads {
  const { cin, cout, weight } = p;
  const hp = h + 2, wp = w + 2;
  const gradPadded = new Float64Array(cin * hp * wp);
  const gradWeight = new Float64Array(weight.length);
  const gradBias = new Float64Array(cout);
  for (let co = 0; co < cout; co++) {
    const plane = co * h * w;
    let bsum = 0;
    for (let k = 0; k < h * w; k++) bsum += gradOut[plane + k];
    gradBias[co] = bsum;
    for (let ci = 0; ci < cin; ci++) {
      const ch = ci * hp * wp;
      const wb = (co * cin + ci) * 9;
      let g00 = 0, g01 = 0, g02 = 0, g10 = 0, g11 = 0, g12 = 0, g20 = 0, g21 = 0, g22 = 0;
      const w00 = weight[wb], w01 = weight[wb + 1], w02 = weight[wb + 2];
      const w10 = weight[wb + 3], w11 = weight[wb + 4], w12 = weight[wb + 5];
      const w20 = weight[wb + 6], w21 = weight[wb + 7], w22 = weight[wb + 8];
      for (let i = 0; i < h; i++) {
        const r0 = ch + i * wp, r1 = r0 + wp, r2 = r1 + wp;
        const ob = plane + i * w;
        for (let j = 0; j < w; j++) {
          const g = gradOut[ob + j];
          if (g === 0) continue;
          g00 += g * padded[r0 + j]; g01 += g * padded[r0 + j + 1]; g02 += g * padded[r0 + j + 2];
          g10 += g * padded[r1 + j]; g11 += g * padded[r1 + j + 1]; g12 += g * padded[r1 + j + 2];
          g20 += g * padded[r2 + j]; g21 += g * padded[r2 + j + 1]; g22 += g * padded[r2 + j + 2];
          gradPadded[r0 + j] += g * w00; gradPadded[r0 + j + 1] += g * w01; gradPadded[r0 + j + 2] += g * w02;
          gradPadded[r1 + j] += g * w10; gradPadded[r1 + j + 1] += g * w11; gradPadded[r1 + j + 2] += g * w12;
          gradPadded[r2 + j] += g * w20; gradPadded[r2 + j + 1] += g * w21; gradPadded[r2 + j + 2] += g * w22;
        }
      }
      gradWeight[wb] = g00; gradWeight[wb + 1] = g01; gradWeight[wb + 2] = g02;
      gradWeight[wb + 3] = g10; gradWeight[wb + 4] = g11; gradWeight[wb + 5] = g12;
      gradWeight[wb + 6] = g20; gradWeight[wb + 7] = g21; gradWeight[wb + 8] = g22;
    }
  }
  return {
    gradInput: reflectPadBackward(gradPadded, cin, h, w),
    gradWeight,
    gradBias,
  };
}

/** Zero the gradient wherever the relu clipped the activation. */
export function maskReluGrad(gradOut: Float64Array, activated: Float64Array): Float64Array {
  const out = new Float64Array(gradOut.length);
  for (let k = 0; k < gradOut.length; k++) out[k] = activated[k] > 0 ? gradOut[k] : 0;
  return out;
}
