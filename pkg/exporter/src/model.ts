/**
 * Fixed-weight toy video classifier used for contract tests.
 *
 * A clip collapses to its temporal mean frame, one stride-2 convolution
 * produces the feature maps of layer "conv1", and a pooled linear head
 * yields three class logits (low / mid / high engagement). Weights come
 * from a seeded PRNG, so every export is reproducible bit for bit.
 */

import * as tf from "@tensorflow/tfjs";

import { mulberry32, uniformArray } from "./prng";
import { Frame } from "./pnm";

export const CLASS_NAMES = ["low", "mid", "high"] as const;
export const LAYERS = ["conv1"] as const;

const CHANNELS_OUT = 4;
const KERNEL = 3;
const STRIDE = 2;

export interface ToyModel {
  id: string;
  convKernel: tf.Tensor4D;
  convBias: tf.Tensor1D;
  denseWeights: tf.Tensor2D;
  denseBias: tf.Tensor1D;
}

export function buildToyModel(seed = 7): ToyModel {
  const rng = mulberry32(seed);
  return {
    id: `toy-conv-k${CHANNELS_OUT}-seed${seed}`,
    convKernel: tf.tensor4d(
      uniformArray(rng, KERNEL * KERNEL * 3 * CHANNELS_OUT, -0.5, 0.5),
      [KERNEL, KERNEL, 3, CHANNELS_OUT]
    ),
    convBias: tf.tensor1d(uniformArray(rng, CHANNELS_OUT, -0.1, 0.1)),
    denseWeights: tf.tensor2d(
      uniformArray(rng, CHANNELS_OUT * CLASS_NAMES.length, -0.5, 0.5),
      [CHANNELS_OUT, CLASS_NAMES.length]
    ),
    denseBias: tf.tensor1d(uniformArray(rng, CLASS_NAMES.length, -0.1, 0.1)),
  };
}

/** Temporal mean of the clip's frames, scaled to [0, 1]: [1, H, W, 3]. */
export function clipInput(frames: Frame[]): tf.Tensor4D {
  if (frames.length === 0) throw new Error("clip has no frames");
  const { height, width } = frames[0];
  const acc = new Float32Array(height * width * 3);
  for (const frame of frames) {
    if (frame.height !== height || frame.width !== width) {
      throw new Error("clip frames disagree on extents");
    }
    for (let i = 0; i < height * width; i++) {
      if (frame.channels === 3) {
        acc[3 * i] += frame.pixels[3 * i];
        acc[3 * i + 1] += frame.pixels[3 * i + 1];
        acc[3 * i + 2] += frame.pixels[3 * i + 2];
      } else {
        const v = frame.pixels[i];
        acc[3 * i] += v;
        acc[3 * i + 1] += v;
        acc[3 * i + 2] += v;
      }
    }
  }
  const scale = 1 / (255 * frames.length);
  for (let i = 0; i < acc.length; i++) acc[i] = Math.fround(acc[i] * scale);
  return tf.tensor4d(acc, [1, height, width, 3]);
}

/** Feature maps of the requested layer: [1, h, w, K]. */
export function backbone(model: ToyModel, input: tf.Tensor4D, layer: string): tf.Tensor4D {
  if (!(LAYERS as readonly string[]).includes(layer)) {
    throw new Error(`layer ${layer} not found (known: ${LAYERS.join(", ")})`);
  }
  return tf.tidy(
    () =>
      tf
        .conv2d(input, model.convKernel, STRIDE, "same")
        .add(model.convBias)
        .relu() as tf.Tensor4D
  );
}

/** Class logits from the feature maps: [3]. */
export function head(model: ToyModel, activations: tf.Tensor): tf.Tensor1D {
  return tf.tidy(() => {
    const pooled = activations.mean([1, 2]) as tf.Tensor2D; // [1, K]
    return pooled.matMul(model.denseWeights).add(model.denseBias).reshape([CLASS_NAMES.length]) as tf.Tensor1D;
  });
}

export interface GradCamDump {
  activations: Float32Array; // [K, h, w] row-major
  gradients: Float32Array; // [K, h, w] row-major
  shape: [number, number, number];
  classIndex: number;
  logits: number[];
}

/** Activations of `layer` and d(logit[class]) / d(activations). */
export function dumpActivationGradients(
  model: ToyModel,
  frames: Frame[],
  layer: string,
  policy: "predicted" | "ground-truth" | "explicit",
  classIndex?: number
): GradCamDump {
  const input = clipInput(frames);
  const acts = backbone(model, input, layer);
  const logits = head(model, acts).arraySync() as number[];

  let selected: number;
  if (policy === "predicted") {
    selected = logits.indexOf(Math.max(...logits));
  } else {
    if (classIndex === undefined || classIndex < 0 || classIndex >= CLASS_NAMES.length) {
      throw new Error(`class policy ${policy} needs a class index in 0..${CLASS_NAMES.length - 1}`);
    }
    selected = classIndex;
  }

  const scoreOf = (a: tf.Tensor) =>
    head(model, a).slice([selected], [1]).reshape([]) as tf.Scalar;
  const grads = tf.grad(scoreOf)(acts);

  const [, h, w, k] = acts.shape as [number, number, number, number];
  // [1, h, w, K] -> [K, h, w]
  const toKhw = (t: tf.Tensor) =>
    t.reshape([h, w, k]).transpose([2, 0, 1]).dataSync() as Float32Array;
  const dump: GradCamDump = {
    activations: new Float32Array(toKhw(acts)),
    gradients: new Float32Array(toKhw(grads)),
    shape: [k, h, w],
    classIndex: selected,
    logits,
  };
  input.dispose();
  acts.dispose();
  grads.dispose();
  return dump;
}
