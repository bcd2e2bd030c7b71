/**
 * The fixed residual denoising CNN, mirrored from the reconstruction
 * engine: conv3x3 (2ch -> 32) + relu, four hidden conv3x3 (32 -> 32) +
 * relu, conv3x3 (32 -> 1) linear. Input channel 0 is the noisy image
 * (raw 0..255 scale), channel 1 the constant noise level; the output is
 * the predicted noise residual, so denoised = input - output.
 */

import { ConvParams, convBackward, convForward, maskReluGrad } from "./conv.js";
import { Rng } from "./rng.js";

export const LAYERS: { cin: number; cout: number; relu: boolean }[] = [
  { cin: 2, cout: 32, relu: true },
  { cin: 32, cout: 32, relu: true },
  { cin: 32, cout: 32, relu: true },
  { cin: 32, cout: 32, relu: true },
  { cin: 32, cout: 32, relu: true },
  { cin: 32, cout: 1, relu: false },
];

export class ResidualCnn {
  params: ConvParams[];

  constructor(params?: ConvParams[]) {
    this.params = params ?? LAYERS.map((l) => ({
      cin: l.cin,
      cout: l.cout,
      weight: new Float64Array(l.cout * l.cin * 9),
      bias: new Float64Array(l.cout),
    }));
  }

  static heInit(rng: Rng): ResidualCnn {
    const model = new ResidualCnn();
    for (let li = 0; li < model.params.length; li++) {
      const p = model.params[li];
      if (li === model.params.length - 1) continue; // zero final conv: start at the identity denoiser
      const scale = Math.sqrt(2.0 / (p.cin * 9));
      for (let k = 0; k < p.weight.length; k++) p.weight[k] = rng.gauss() * scale;
      // biases start at zero
    }
    return model;
  }

  /** Predicted residual for one (image, sigma) pair. */
  forward(image: Float64Array, sigma: number, h: number, w: number): Float64Array {
    let act: Float64Array = new Float64Array(2 * h * w);
    act.set(image, 0);
    act.fill(sigma, h * w);
    for (let li = 0; li < this.params.length; li++) {
      act = convForward(act, h, w, this.params[li], LAYERS[li].relu).out;
    }
    return act;
  }

  denoise(image: Float64Array, sigma: number, h: number, w: number): Float64Array {
    const r = this.forward(image, sigma, h, w);
    const out = new Float64Array(image.length);
    for (let k = 0; k < out.length; k++) out[k] = image[k] - r[k];
    return out;
  }

  /**
   * Forward keeping the per-layer state needed for backward.
   */
  forwardTraining(image: Float64Array, sigma: number, h: number, w: number) {
    const acts: Float64Array[] = [];
    const paddeds: Float64Array[] = [];
    let act: Float64Array = new Float64Array(2 * h * w);
    act.set(image, 0);
    act.fill(sigma, h * w);
    for (let li = 0; li < this.params.length; li++) {
      const { out, padded } = convForward(act, h, w, this.params[li], LAYERS[li].relu);
      acts.push(out);
      paddeds.push(padded);
      act = out;
    }
    return { residual: act, acts, paddeds };
  }

  /**
   * Backprop dL/d(residual) through the network; accumulates parameter
   * gradients into `grads` and returns dL/d(input image channel).
   */
  backward(gradResidual: Float64Array, state: { acts: Float64Array[]; paddeds: Float64Array[] },
           h: number, w: number, grads: ConvParams[]): Float64Array {
    let grad = gradResidual;
    for (let li = this.params.length - 1; li >= 0; li--) {
      if (LAYERS[li].relu) grad = maskReluGrad(grad, state.acts[li]);
      const g = convBackward(grad, state.paddeds[li], h, w, this.params[li]);
      for (let k = 0; k < g.gradWeight.length; k++) grads[li].weight[k] += g.gradWeight[k];
      for (let k = 0; k < g.gradBias.length; k++) grads[li].bias[k] += g.gradBias[k];
      grad = g.gradInput;
    }
    // dL/d(image) flows through both the image channel and denoised = x - r
    return grad.slice(0, h * w);
  }

  zeroGrads(): ConvParams[] {
    return this.params.map((p) => ({
      cin: p.cin,
      cout: p.cout,
      weight: new Float64Array(p.weight.length),
      bias: new Float64Array(p.bias.length),
    }));
  }

  clone(): ResidualCnn {
    return new ResidualCnn(this.params.map((p) => ({
      cin: p.cin,
      cout: p.cout,
      weight: new Float64Array(p.weight),
      bias: new Float64Array(p.bias),
    })));
  }

  /**
   * Reparameterize a network trained on scaled inputs (image values
   * divided by `imageScale`, sigma channel divided by `sigmaScale`) into
   * one that consumes raw pixels and raw sigma: the first conv's
   * per-channel taps absorb the divisions, the last conv and its bias
   * the output multiplication. The function computed on raw data is
   * unchanged.
   */
  scaleFolded(imageScale: number, sigmaScale: number): ResidualCnn {
    const folded = this.clone();
    const first = folded.params[0];
    // weight layout (cout, cin, 3, 3); image channel 0, sigma channel 1
    for (let co = 0; co < first.cout; co++) {
      const base = co * first.cin * 9;
      for (let k = 0; k < 9; k++) first.weight[base + k] /= imageScale;
      for (let k = 9; k < 18; k++) first.weight[base + k] /= sigmaScale;
    }
    const last = folded.params[folded.params.length - 1];
    for (let k = 0; k < last.weight.length; k++) last.weight[k] *= imageScale;
    for (let k = 0; k < last.bias.length; k++) last.bias[k] *= imageScale;
    return folded;
  }
}
