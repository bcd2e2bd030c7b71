/** Adam optimizer over the conv parameter list. */

import { ConvParams } from "./conv.js";

export class Adam {
  private m: { weight: Float64Array; bias: Float64Array }[];
  private v: { weight: Float64Array; bias: Float64Array }[];
  private t = 0;

  constructor(
    private params: ConvParams[],
    private lr: number,
    private beta1 = 0.9,
    private beta2 = 0.999,
    private eps = 1e-8,
  ) {
    this.m = params.map((p) => ({
      weight: new Float64Array(p.weight.length),
      bias: new Float64Array(p.bias.length),
    }));
    this.v = params.map((p) => ({
      weight: new Float64Array(p.weight.length),
      bias: new Float64Array(p.bias.length),
    }));
  }

  setLearningRate(lr: number): void {
    this.lr = lr;
  }

  step(grads: ConvParams[]): void {
    this.t += 1;
    const bc1 = 1 - Math.pow(this.beta1, this.t);
    const bc2 = 1 - Math.pow(this.beta2, this.t);
    for (let li = 0; li < this.params.length; li++) {
      this.update(this.params[li].weight, grads[li].weight, this.m[li].weight, this.v[li].weight, bc1, bc2);
      this.update(this.params[li].bias, grads[li].bias, this.m[li].bias, this.v[li].bias, bc1, bc2);
    }
  }

  private update(p: Float64Array, g: Float64Array, m: Float64Array, v: Float64Array,
                 bc1: number, bc2: number): void {
    for (let k = 0; k < p.length; k++) {
      m[k] = this.beta1 * m[k] + (1 - this.beta1) * g[k];
      v[k] = this.beta2 * v[k] + (1 - this.beta2) * g[k] * g[k];
      p[k] -= (this.lr * (m[k] / bc1)) / (Math.sqrt(v[k] / bc2) + this.eps);
    }
  }
}
