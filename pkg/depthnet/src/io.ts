/**
 * Checkpoint storage: model.json (topology + weight specs + net config)
 * and weights.bin in one directory, via tf.io memory handlers so no
 * native tfjs binding is needed.
 */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";

import { NetConfig } from "./config";

export async function saveCheckpoint(
  model: tf.LayersModel,
  cfg: NetConfig,
  dir: string,
): Promise<void> {
  fs.mkdirSync(dir, { recursive: true });
  await model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      const weightData = tf.io.CompositeArrayBuffer.join(artifacts.weightData);
      fs.writeFileSync(
        path.join(dir, "model.json"),
        JSON.stringify(
          {
            netConfig: cfg,
            modelTopology: artifacts.modelTopology,
            weightSpecs: artifacts.weightSpecs,
          },
          null,
          2,
        ),
      );
      fs.writeFileSync(path.join(dir, "weights.bin"), Buffer.from(weightData));
      return {
        modelArtifactsInfo: {
          dateSaved: new Date(),
          modelTopologyType: "JSON" as const,
        },
      };
    }),
  );
}

export async function loadCheckpoint(
  dir: string,
): Promise<{ model: tf.LayersModel; cfg: NetConfig }> {
  const metaPath = path.join(dir, "model.json");
  if (!fs.existsSync(metaPath)) {
    throw new Error(`missing checkpoint: ${metaPath}`);
  }
  const meta = JSON.parse(fs.readFileSync(metaPath, "utf8"));
  const weights = fs.readFileSync(path.join(dir, "weights.bin"));
  const buffer = weights.buffer.slice(
    weights.byteOffset,
    weights.byteOffset + weights.byteLength,
  );
  const model = await tf.loadLayersModel(
    tf.io.fromMemory({
      modelTopology: meta.modelTopology,
      weightSpecs: meta.weightSpecs,
      weightData: buffer,
    }),
  );
  return { model, cfg: meta.netConfig as NetConfig };
}
