/**
 * Training loop: Adam on minibatches drawn in a fixed round-robin order,
 * per-step loss appended to a CSV curve. Deterministic given the config
 * seed (weight init is seeded, batches are not shuffled, and the CPU
 * backend is deterministic); a non-finite loss aborts immediately.
 */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";

import { NetConfig } from "./config";
import { Batch, Manifest, loadBatch, selectEntries } from "./data";
import { installFastConvBackpropFilter } from "./fastgrad";
import { lossFn } from "./loss";

installFastConvBackpropFilter();

export interface TrainResult {
  finalLoss: number;
  initialLoss: number;
  curve: Array<{ step: number; loss: number }>;
}

export interface TrainOptions {
  steps: number;
  datasetDir: string;
  manifest: Manifest;
  split: "train" | "test" | "all";
  curveCsv?: string;
  logEvery?: number;
}

export async function train(
  model: tf.LayersModel,
  cfg: NetConfig,
  opts: TrainOptions,
): Promise<TrainResult> {
  const entries = selectEntries(opts.manifest, opts.split);
  if (entries.length === 0) {
    throw new Error(`empty ${opts.split} split: nothing to train on`);
  }
  const all: Batch = loadBatch(opts.datasetDir, entries, cfg.inputWidth, cfg.inputHeight);
  const n = entries.length;
  const batchSize = Math.min(cfg.batchSize, n);
  const optimizer = tf.train.adam(cfg.learningRate);
  const loss = lossFn(cfg.loss);
  const curve: Array<{ step: number; loss: number }> = [];

  let cursor = 0;
  const nextBatch = (): { x: tf.Tensor4D; y: tf.Tensor4D } => {
    if (batchSize === n) {
      return { x: all.images, y: all.targets };
    }
    return tf.tidy(() => {
      const idx: number[] = [];
      for (let i = 0; i < batchSize; i++) idx.push((cursor + i) % n);
      cursor = (cursor + batchSize) % n;
      const gather = tf.tensor1d(idx, "int32");
      return {
        x: tf.gather(all.images, gather) as tf.Tensor4D,
        y: tf.gather(all.targets, gather) as tf.Tensor4D,
      };
    });
  };

  for (let step = 0; step < opts.steps; step++) {
    const { x, y } = nextBatch();
    const value = optimizer.minimize(
      () => loss(model.apply(x, { training: true }) as tf.Tensor4D, y),
      true,
    ) as tf.Scalar;
    const lossValue = (await value.data())[0];
    value.dispose();
    if (x !== all.images) {
      x.dispose();
      y.dispose();
    }
    if (!Number.isFinite(lossValue)) {
      throw new Error(`non-finite loss ${lossValue} at step ${step}; aborting`);
    }
    curve.push({ step, loss: lossValue });
    if (opts.logEvery && step % opts.logEvery === 0) {
      console.log(`step ${step}: loss ${lossValue.toExponential(4)}`);
    }
  }

  if (opts.curveCsv) {
    fs.mkdirSync(path.dirname(opts.curveCsv), { recursive: true });
    const lines = ["step,loss", ...curve.map((c) => `${c.step},${c.loss}`)];
    fs.writeFileSync(opts.curveCsv, lines.join("\n") + "\n");
  }

  all.images.dispose();
  all.targets.dispose();
  optimizer.dispose();
  return {
    initialLoss: curve[0]?.loss ?? NaN,
    finalLoss: curve[curve.length - 1]?.loss ?? NaN,
    curve,
  };
}
