import { describe, expect, it } from "vitest";

import { ConvParams, convBackward, convForward, maskReluGrad, reflectPad } from "../src/conv.js";
import { Rng } from "../src/rng.js";

function randomParams(rng: Rng, cin: number, cout: number): ConvParams {
  const weight = new Float64Array(cout * cin * 9);
  const bias = new Float64Array(cout);
  for (let k = 0; k < weight.length; k++) weight[k] = rng.gauss() * 0.3;
  for (let k = 0; k < bias.length; k++) bias[k] = rng.gauss() * 0.1;
  return { cin, cout, weight, bias };
}

function randomInput(rng: Rng, c: number, h: number, w: number): Float64Array {
  const x = new Float64Array(c * h * w);
  for (let k = 0; k < x.length; k++) x[k] = rng.gauss();
  return x;
}

describe("reflectPad", () => {
  it("mirrors without repeating the edge sample", () => {
    const x = new Float64Array([1, 2, 3, 4, 5, 6, 7, 8, 9]);
    const padded = reflectPad(x, 1, 3, 3);
    // corner of the padded grid reflects (1,1)
    expect(padded[0]).toBe(5);
    expect(padded[1]).toBe(4);
    expect(Array.from(padded.subarray(5, 10))).toEqual([2, 1, 2, 3, 2]);
  });
});

describe("convForward", () => {
  it("computes a hand-checkable single-tap case", () => {
    const x = new Float64Array([0, 0, 0, 0, 1, 0, 0, 0, 0]);
    const weight = new Float64Array(9);
    weight[4] = 2.0; // center tap only
    const p: ConvParams = { cin: 1, cout: 1, weight, bias: new Float64Array([0.5]) };
    const { out } = convForward(x, 3, 3, p, false);
    expect(out[4]).toBeCloseTo(2.5, 12);
    expect(out[0]).toBeCloseTo(0.5, 12);
  });

  it("relu clips negatives", () => {
    const rng = new Rng(1);
    const p = randomParams(rng, 1, 2);
    const x = randomInput(rng, 1, 5, 5);
    const { out } = convForward(x, 5, 5, p, true);
    for (const v of out) expect(v).toBeGreaterThanOrEqual(0);
  });
});

describe("convBackward", () => {
  it("matches finite differences for weight, bias, and input grads", () => {
    const rng = new Rng(2);
    const h = 5, w = 4;
    const p = randomParams(rng, 2, 3);
    const x = randomInput(rng, 2, h, w);
    const target = randomInput(rng, 3, h, w);

    const loss = (input: Float64Array, params: ConvParams): number => {
      const { out } = convForward(input, h, w, params, true);
      let total = 0;
      for (let k = 0; k < out.length; k++) total += (out[k] - target[k]) ** 2;
      return total;
    };

    const { out, padded } = convForward(x, h, w, p, true);
    let gradOut = new Float64Array(out.length);
    for (let k = 0; k < out.length; k++) gradOut[k] = 2 * (out[k] - target[k]);
    gradOut = maskReluGrad(gradOut, out);
    const g = convBackward(gradOut, padded, h, w, p);

    const eps = 1e-6;
    for (const k of [0, 7, 23, p.weight.length - 1]) {
      const orig = p.weight[k];
      p.weight[k] = orig + eps;
      const up = loss(x, p);
      p.weight[k] = orig - eps;
      const down = loss(x, p);
      p.weight[k] = orig;
      expect(g.gradWeight[k]).toBeCloseTo((up - down) / (2 * eps), 4);
    }
    for (const k of [0, 2]) {
      const orig = p.bias[k];
      p.bias[k] = orig + eps;
      const up = loss(x, p);
      p.bias[k] = orig - eps;
      const down = loss(x, p);
      p.bias[k] = orig;
      expect(g.gradBias[k]).toBeCloseTo((up - down) / (2 * eps), 4);
    }
    for (const k of [0, 11, 25, x.length - 1]) {
      const orig = x[k];
      x[k] = orig + eps;
      const up = loss(x, p);
      x[k] = orig - eps;
      const down = loss(x, p);
      x[k] = orig;
      expect(g.gradInput[k]).toBeCloseTo((up - down) / (2 * eps), 4);
    }
  });
});
