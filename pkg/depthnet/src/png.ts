/** 8-bit PNG helpers bridging the dataset files and tensors. */

import * as fs from "fs";
import { PNG } from "pngjs";

export interface GrayImage {
  width: number;
  height: number;
  /** Row-major 8-bit gray levels. */
  data: Uint8Array;
}

export interface RgbImage {
  width: number;
  height: number;
  /** Row-major 8-bit RGB triples. */
  data: Uint8Array;
}

export function readRgb(path: string): RgbImage {
  const png = PNG.sync.read(fs.readFileSync(path));
  const n = png.width * png.height;
  const data = new Uint8Array(n * 3);
  for (let i = 0; i < n; i++) {
    data[3 * i] = png.data[4 * i];
    data[3 * i + 1] = png.data[4 * i + 1];
    data[3 * i + 2] = png.data[4 * i + 2];
  }
  return { width: png.width, height: png.height, data };
}

export function readGray(path: string): GrayImage {
  const png = PNG.sync.read(fs.readFileSync(path));
  const n = png.width * png.height;
  const data = new Uint8Array(n);
  for (let i = 0; i < n; i++) {
    const r = png.data[4 * i];
    const g = png.data[4 * i + 1];
    const b = png.data[4 * i + 2];
    if (r !== g || r !== b) {
      throw new Error(`${path}: not a gray image (pixel ${i}: ${r},${g},${b})`);
    }
    data[i] = r;
  }
  return { width: png.width, height: png.height, data };
}

export function writeGray(image: GrayImage, path: string): void {
  const png = new PNG({ width: image.width, height: image.height, colorType: 0 });
  for (let i = 0; i < image.width * image.height; i++) {
    png.data[4 * i] = image.data[i];
    png.data[4 * i + 1] = image.data[i];
    png.data[4 * i + 2] = image.data[i];
    png.data[4 * i + 3] = 255;
  }
  fs.writeFileSync(path, PNG.sync.write(png, { colorType: 0 }));
}
