/**
 * Inference: run the network on selected views and export 8-bit depth
 * PNGs at the dataset's native resolution (bilinear upsample, clamp to
 * [0, 255]), named after the ground-truth depth files so the pipeline's
 * synth/eval commands consume them directly. A predictions manifest
 * records what was written.
 */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";

import { NetConfig } from "./config";
import { Manifest, loadView, selectEntries } from "./data";
import { writeGray } from "./png";

export interface PredictionRecord {
  index: number;
  depth_path: string;
  split_tag: string;
}

export async function predictAll(
  model: tf.LayersModel,
  cfg: NetConfig,
  manifest: Manifest,
  datasetDir: string,
  split: "test" | "all",
  outDir: string,
): Promise<PredictionRecord[]> {
  const entries = selectEntries(manifest, split);
  const outWidth = (manifest.scene.width as number) ?? cfg.inputWidth;
  const outHeight = (manifest.scene.height as number) ?? cfg.inputHeight;
  fs.mkdirSync(outDir, { recursive: true });

  const records: PredictionRecord[] = [];
  for (const entry of entries) {
    const { rgb, depth } = loadView(datasetDir, entry, cfg.inputWidth, cfg.inputHeight);
    depth.dispose();
    const gray = tf.tidy(() => {
      const batched = rgb.expandDims(0) as tf.Tensor4D;
      const pred = model.predict(batched) as tf.Tensor4D;
      const up = tf.image.resizeBilinear(pred, [outHeight, outWidth]);
      return up.squeeze([0, 3]).mul(255).round().clipByValue(0, 255) as tf.Tensor2D;
    });
    rgb.dispose();
    const values = await gray.data();
    gray.dispose();
    const name = path.basename(entry.depth_path);
    writeGray(
      { width: outWidth, height: outHeight, data: Uint8Array.from(values) },
      path.join(outDir, name),
    );
    records.push({ index: entry.index, depth_path: name, split_tag: entry.split_tag });
  }

  fs.writeFileSync(
    path.join(outDir, "predictions.json"),
    JSON.stringify(
      {
        object_name: manifest.object_name,
        source_manifest_views: manifest.view_count,
        split,
        width: outWidth,
        height: outHeight,
        entries: records,
      },
      null,
      2,
    ) + "\n",
  );
  return records;
}
