/**
 * Unitary 2-D FFT on power-of-two grids (split re/im Float64Arrays),
 * radix-2 iterative. Enough for the differentiable data-consistency
 * unroll; dataset crops for that path must have power-of-two dims.
 */

export function isPow2(n: number): boolean {
  return n > 0 && (n & (n - 1)) === 0;
}

/** In-place complex FFT along rows of an h x w grid (w power of two). */
function fftRows(re: Float64Array, im: Float64Array, h: number, w: number, inverse: boolean): void {
  const sign = inverse ? 1 : -1;
  for (let row = 0; row < h; row++) {
    const base = row * w;
    // bit-reversal permutation
    for (let i = 1, j = 0; i < w; i++) {
      let bit = w >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) {
        const ti = base + i, tj = base + j;
        let t = re[ti]; re[ti] = re[tj]; re[tj] = t;
        t = im[ti]; im[ti] = im[tj]; im[tj] = t;
      }
    }
    for (let len = 2; len <= w; len <<= 1) {
      const ang = (sign * 2 * Math.PI) / len;
      const wr = Math.cos(ang), wi = Math.sin(ang);
      for (let i = 0; i < w; i += len) {
        let cr = 1, ci = 0;
        for (let k = 0; k < len / 2; k++) {
          const a = base + i + k;
          const b = a + len / 2;
          const xr = re[b] * cr - im[b] * ci;
          const xi = re[b] * ci + im[b] * cr;
          re[b] = re[a] - xr; im[b] = im[a] - xi;
          re[a] += xr; im[a] += xi;
          const ncr = cr * wr - ci * wi;
          ci = cr * wi + ci * wr;
          cr = ncr;
        }
      }
    }
  }
}

function transpose(src: Float64Array, h: number, w: number): Float64Array {
  const out = new Float64Array(src.length);
  for (let i = 0; i < h; i++) {
    for (let j = 0; j < w; j++) out[j * h + i] = src[i * w + j];
  }
  return out;
}

export interface ComplexGrid {
  re: Float64Array;
  im: Float64Array;
}

/** Unitary 2-D transform; set `inverse` for the adjoint direction. */
export function fft2(re: Float64Array, im: Float64Array, h: number, w: number,
                     inverse = false): ComplexGrid {
  if (!isPow2(h) || !isPow2(w)) {
    throw new Error(`fft2 needs power-of-two dims, got ${h}x${w}`);
  }
  let r: Float64Array = new Float64Array(re);
  let m: Float64Array = new Float64Array(im);
  fftRows(r, m, h, w, inverse);
  r = transpose(r, h, w);
  m = transpose(m, h, w);
  fftRows(r, m, w, h, inverse);
  r = transpose(r, w, h);
  m = transpose(m, w, h);
  const scale = 1 / Math.sqrt(h * w);
  for (let k = 0; k < r.length; k++) {
    r[k] *= scale;
    m[k] *= scale;
  }
  return { re: r, im: m };
}
