/**
 * Dataset access: the generator's manifest JSON plus RGB/depth PNG pairs.
 *
 * Inputs are scaled to [0, 1] and bilinearly resized to the working
 * resolution; targets are gray/255. The train/test split is read from the
 * manifest's split tags (60% interleaved), never re-derived here.
 */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";

import { readGray, readRgb } from "./png";

export interface ManifestEntry {
  index: number;
  azimuth_degrees: number;
  rgb_path: string;
  depth_path: string;
  split_tag: "train" | "test";
}

export interface Manifest {
  object_name: string;
  view_count: number;
  scene: { width?: number; height?: number; [key: string]: unknown };
  entries: ManifestEntry[];
}

export interface SplitSpec {
  train: number[];
  test: number[];
}

export function readManifest(manifestPath: string): Manifest {
  const doc = JSON.parse(fs.readFileSync(manifestPath, "utf8")) as Manifest;
  if (!Array.isArray(doc.entries) || doc.entries.length !== doc.view_count) {
    throw new Error(`${manifestPath}: entry count does not match view_count`);
  }
  return doc;
}

export function splitSpec(manifest: Manifest): SplitSpec {
  const train: number[] = [];
  const test: number[] = [];
  for (const e of manifest.entries) {
    (e.split_tag === "train" ? train : test).push(e.index);
  }
  const overlap = train.filter((i) => test.includes(i));
  if (overlap.length > 0 || train.length + test.length !== manifest.view_count) {
    throw new Error("split tags must partition the views");
  }
  return { train, test };
}

export function selectEntries(
  manifest: Manifest,
  split: "train" | "test" | "all",
): ManifestEntry[] {
  if (split === "all") return [...manifest.entries];
  return manifest.entries.filter((e) => e.split_tag === split);
}

/** One view as (rgb [h,w,3] in [0,1], depth [h,w,1] in [0,1]) at working size. */
export function loadView(
  datasetDir: string,
  entry: ManifestEntry,
  workWidth: number,
  workHeight: number,
): { rgb: tf.Tensor3D; depth: tf.Tensor3D } {
  const rgbRaw = readRgb(path.join(datasetDir, entry.rgb_path));
  const depthRaw = readGray(path.join(datasetDir, entry.depth_path));
  if (rgbRaw.width !== depthRaw.width || rgbRaw.height !== depthRaw.height) {
    throw new Error(`view ${entry.index}: rgb/depth size mismatch`);
  }
  return tf.tidy(() => {
    const rgb = tf
      .tensor3d(Float32Array.from(rgbRaw.data), [rgbRaw.height, rgbRaw.width, 3])
      .div(255) as tf.Tensor3D;
    const depth = tf
      .tensor3d(Float32Array.from(depthRaw.data), [depthRaw.height, depthRaw.width, 1])
      .div(255) as tf.Tensor3D;
    const needResize = rgbRaw.width !== workWidth || rgbRaw.height !== workHeight;
    return {
      rgb: needResize
        ? tf.image.resizeBilinear(rgb, [workHeight, workWidth])
        : (rgb.clone() as tf.Tensor3D),
      depth: needResize
        ? tf.image.resizeBilinear(depth, [workHeight, workWidth])
        : (depth.clone() as tf.Tensor3D),
    };
  });
}

export interface Batch {
  images: tf.Tensor4D;
  targets: tf.Tensor4D;
  indices: number[];
}

/** Stack a list of views into one batch pair. */
export function loadBatch(
  datasetDir: string,
  entries: ManifestEntry[],
  workWidth: number,
  workHeight: number,
): Batch {
  const rgbs: tf.Tensor3D[] = [];
  const depths: tf.Tensor3D[] = [];
  for (const e of entries) {
    const { rgb, depth } = loadView(datasetDir, e, workWidth, workHeight);
    rgbs.push(rgb);
    depths.push(depth);
  }
  const images = tf.stack(rgbs) as tf.Tensor4D;
  const targets = tf.stack(depths) as tf.Tensor4D;
  rgbs.forEach((t) => t.dispose());
  depths.forEach((t) => t.dispose());
  return { images, targets, indices: entries.map((e) => e.index) };
}
