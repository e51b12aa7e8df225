/**
 * Encoder-decoder depth estimator.
 *
 * Encoder: 7x7 stride-2 conv, BN/ReLU/3x3 max pool, four dense blocks with
 * transition layers (BN-ReLU-1x1 conv-2x2 max pool). Transitions pool in
 * floor mode ('valid') while the stem pads 'same', which reproduces the
 * 360-180-90-45-22-11 size chain exactly. Decoder: 1x1 bottleneck halving
 * channels, four upsampling stages (bilinear resize to the matching
 * encoder size, skip concatenation, two 3x3 conv-BN-ReLU), a 3x3 conv to
 * one channel, and a final bilinear resize to the input resolution. The
 * head conv is zero-initialized so the step-0 prediction is exactly zero.
 */

import * as tf from "@tensorflow/tfjs";

import {
  GROWTH_RATE,
  INITIAL_FEATURES,
  NetConfig,
  encoderSizes,
  scaledChannels,
  validateConfig,
} from "./config";

/**
 * 1-D bilinear interpolation weights from inSize to outSize samples,
 * matching resizeBilinear with alignCorners=false (src = dst * in/out,
 * edge clamped). Returned row-major [outSize, inSize].
 */
export function interpolationMatrix(outSize: number, inSize: number): Float32Array {
  const m = new Float32Array(outSize * inSize);
  const scale = inSize / outSize;
  for (let j = 0; j < outSize; j++) {
    const src = j * scale;
    const i0 = Math.min(Math.floor(src), inSize - 1);
    const i1 = Math.min(i0 + 1, inSize - 1);
    const frac = Math.min(Math.max(src - i0, 0), 1);
    m[j * inSize + i0] += 1 - frac;
    m[j * inSize + i1] += frac;
  }
  return m;
}

/**
 * Bilinear resize to a fixed target size, serializable for checkpoints.
 *
 * Implemented as separable interpolation matrices applied with matMul
 * rather than tf.image.resizeBilinear: the CPU backend's
 * ResizeBilinearGrad kernel returns an H/W-transposed gradient for
 * non-square inputs (tfjs 4.22), while matMul gradients are correct.
 */
export class ResizeBilinearLayer extends tf.layers.Layer {
  static className = "ResizeBilinearLayer";
  private readonly targetHeight: number;
  private readonly targetWidth: number;

  constructor(args: { targetHeight: number; targetWidth: number; name?: string }) {
    super({ name: args.name });
    this.targetHeight = args.targetHeight;
    this.targetWidth = args.targetWidth;
  }

  computeOutputShape(inputShape: tf.Shape | tf.Shape[]): tf.Shape {
    const shape = (Array.isArray(inputShape[0]) ? inputShape[0] : inputShape) as tf.Shape;
    return [shape[0], this.targetHeight, this.targetWidth, shape[3]];
  }

  call(inputs: tf.Tensor | tf.Tensor[]): tf.Tensor {
    const x = (Array.isArray(inputs) ? inputs[0] : inputs) as tf.Tensor4D;
    const [b, h1, w1, c] = x.shape;
    const h2 = this.targetHeight;
    const w2 = this.targetWidth;
    return tf.tidy(() => {
      // width pass: [B,H1,W1,C] -> [B,H1,C,W1] -> (.. , W1) x (W1, W2)
      const wMatT = tf.tensor2d(interpolationMatrix(w2, w1), [w2, w1]).transpose();
      let y = x.transpose([0, 1, 3, 2]).reshape([b * h1 * c, w1]);
      y = tf.matMul(y, wMatT).reshape([b, h1, c, w2]);
      // height pass: [B,H1,C,W2] -> [B,W2,C,H1] -> (.., H1) x (H1, H2)
      const hMatT = tf.tensor2d(interpolationMatrix(h2, h1), [h2, h1]).transpose();
      let z = y.transpose([0, 3, 2, 1]).reshape([b * w2 * c, h1]);
      z = tf.matMul(z, hMatT).reshape([b, w2, c, h2]);
      return z.transpose([0, 3, 1, 2]); // [B,H2,W2,C]
    });
  }

  getConfig(): tf.serialization.ConfigDict {
    const config = super.getConfig();
    return { ...config, targetHeight: this.targetHeight, targetWidth: this.targetWidth };
  }

  static fromConfig<T extends tf.serialization.Serializable>(
    cls: tf.serialization.SerializableConstructor<T>,
    config: tf.serialization.ConfigDict,
  ): T {
    return new (cls as unknown as typeof ResizeBilinearLayer)({
      targetHeight: config["targetHeight"] as number,
      targetWidth: config["targetWidth"] as number,
      name: config["name"] as string,
    }) as unknown as T;
  }
}

tf.serialization.registerClass(ResizeBilinearLayer);

export interface TapShapes {
  /** Stage name -> [channels, width, height] of the symbolic output. */
  [stage: string]: [number, number, number];
}

export interface BuiltModel {
  model: tf.LayersModel;
  taps: TapShapes;
}

function tapOf(t: tf.SymbolicTensor): [number, number, number] {
  const [, h, w, c] = t.shape;
  return [c as number, w as number, h as number];
}

export function buildModel(cfg: NetConfig): BuiltModel {
  validateConfig(cfg);
  encoderSizes(cfg.inputWidth, cfg.inputHeight); // throws on infeasible input

  const wm = cfg.widthMultiplier;
  const growth = scaledChannels(GROWTH_RATE, wm);
  let seedCounter = cfg.seed * 7919;
  const nextSeed = () => ++seedCounter;

  const conv = (
    x: tf.SymbolicTensor,
    filters: number,
    kernel: number,
    opts: { strides?: number; name: string },
  ) =>
    tf.layers
      .conv2d({
        filters,
        kernelSize: kernel,
        strides: opts.strides ?? 1,
        padding: "same",
        useBias: false,
        kernelInitializer: tf.initializers.heNormal({ seed: nextSeed() }),
        name: opts.name,
      })
      .apply(x) as tf.SymbolicTensor;

  // momentum 0.9: moving statistics converge within ~50 steps, so
  // inference-mode predictions track short toy trainings
  const bnRelu = (x: tf.SymbolicTensor, name: string) => {
    const y = tf.layers
      .batchNormalization({ momentum: 0.9, name: `${name}_bn` })
      .apply(x) as tf.SymbolicTensor;
    return tf.layers.reLU({ name: `${name}_relu` }).apply(y) as tf.SymbolicTensor;
  };

  const denseLayer = (x: tf.SymbolicTensor, name: string) => {
    let y = bnRelu(x, `${name}_a`);
    y = conv(y, 4 * growth, 1, { name: `${name}_conv1` });
    y = bnRelu(y, `${name}_b`);
    y = conv(y, growth, 3, { name: `${name}_conv3` });
    return tf.layers.concatenate({ name: `${name}_cat` }).apply([x, y]) as tf.SymbolicTensor;
  };

  const denseBlock = (x: tf.SymbolicTensor, layers: number, name: string) => {
    let y = x;
    for (let i = 0; i < layers; i++) y = denseLayer(y, `${name}_l${i}`);
    return y;
  };

  const transition = (x: tf.SymbolicTensor, name: string) => {
    const channels = Math.max(1, Math.floor((x.shape[3] as number) / 2));
    let y = bnRelu(x, name);
    y = conv(y, channels, 1, { name: `${name}_conv` });
    // floor-mode pooling: 'valid' realizes the 45 -> 22 step
    return tf.layers
      .maxPooling2d({ poolSize: 2, strides: 2, padding: "valid", name: `${name}_pool` })
      .apply(y) as tf.SymbolicTensor;
  };

  const upStage = (
    x: tf.SymbolicTensor,
    skip: tf.SymbolicTensor,
    channels: number,
    name: string,
  ) => {
    const [, sh, sw] = skip.shape;
    let y = new ResizeBilinearLayer({
      targetHeight: sh as number,
      targetWidth: sw as number,
      name: `${name}_resize`,
    }).apply(x) as tf.SymbolicTensor;
    y = tf.layers.concatenate({ name: `${name}_cat` }).apply([y, skip]) as tf.SymbolicTensor;
    y = conv(y, channels, 3, { name: `${name}_convA` });
    y = bnRelu(y, `${name}_A`);
    y = conv(y, channels, 3, { name: `${name}_convB` });
    y = bnRelu(y, `${name}_B`);
    return y;
  };

  const taps: TapShapes = {};
  const input = tf.input({ shape: [cfg.inputHeight, cfg.inputWidth, 3], name: "rgb" });
  taps["input"] = tapOf(input);

  // Stem
  const stemConv = conv(input, scaledChannels(INITIAL_FEATURES, wm), 7, {
    strides: 2,
    name: "stem_conv",
  });
  taps["stem_conv"] = tapOf(stemConv);
  const stemRelu = bnRelu(stemConv, "stem");
  const stemPool = tf.layers
    .maxPooling2d({ poolSize: 3, strides: 2, padding: "same", name: "stem_pool" })
    .apply(stemRelu) as tf.SymbolicTensor;
  taps["stem_pool"] = tapOf(stemPool);

  // Dense blocks; transitions follow all but the last block.
  const [n1, n2, n3, n4] = cfg.denseLayerCounts;
  const block1 = denseBlock(stemPool, n1, "block1");
  const trans1 = transition(block1, "trans1");
  taps["block1"] = tapOf(trans1);
  const block2 = denseBlock(trans1, n2, "block2");
  const trans2 = transition(block2, "trans2");
  taps["block2"] = tapOf(trans2);
  const block3 = denseBlock(trans2, n3, "block3");
  const trans3 = transition(block3, "trans3");
  taps["block3"] = tapOf(trans3);
  const block4 = denseBlock(trans3, n4, "block4");
  taps["block4"] = tapOf(block4);

  const encoded = tf.layers
    .batchNormalization({ momentum: 0.9, name: "encoder_bn" })
    .apply(block4) as tf.SymbolicTensor;
  taps["encoder_bn"] = tapOf(encoded);

  // Bottleneck 1x1 conv halving channels
  const bottleneckCh = Math.max(1, Math.floor((encoded.shape[3] as number) / 2));
  const bottleneck = conv(encoded, bottleneckCh, 1, { name: "bottleneck" });
  taps["bottleneck"] = tapOf(bottleneck);

  // Decoder with skip connections; the floor only matters at toy widths
  // (the full-scale chain 1104 -> 552 -> 276 -> 138 -> 69 never hits it).
  const halve = (c: number) => Math.max(8, Math.round(c / 2));
  let deco = bottleneck;
  let channels = bottleneckCh;
  const skipTensors = [trans2, trans1, stemPool, stemRelu];
  for (let i = 0; i < 4; i++) {
    channels = halve(channels);
    deco = upStage(deco, skipTensors[i], channels, `up${i + 1}`);
    taps[`up${i + 1}`] = tapOf(deco);
  }

  // Head: 3x3 conv to one channel, zero-initialized.
  const head = tf.layers
    .conv2d({
      filters: 1,
      kernelSize: 3,
      padding: "same",
      useBias: true,
      kernelInitializer: "zeros",
      biasInitializer: "zeros",
      name: "head_conv",
    })
    .apply(deco) as tf.SymbolicTensor;
  taps["head_conv"] = tapOf(head);

  const output = new ResizeBilinearLayer({
    targetHeight: cfg.inputHeight,
    targetWidth: cfg.inputWidth,
    name: "output_resize",
  }).apply(head) as tf.SymbolicTensor;
  taps["output"] = tapOf(output);

  const model = tf.model({ inputs: input, outputs: output, name: "depthnet" });
  return { model, taps };
}
