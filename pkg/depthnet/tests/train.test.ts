import * as fs from "fs";
import * as path from "path";
import { describe, expect, it } from "vitest";

import { TOY_CONFIG } from "../src/config";
import { readManifest } from "../src/data";
import { buildModel } from "../src/model";
import { writeGray } from "../src/png";
import { train } from "../src/train";
import { genDataset, tmpdir } from "./helpers";

describe("training loop", () => {
  it("is deterministic for a fixed seed", async () => {
    const dir = tmpdir("dn-det-");
    genDataset(path.join(dir, "data"), { shape: "cube", views: 4, width: 96, height: 56 });
    const manifest = readManifest(path.join(dir, "data", "manifest.json"));
    const cfg = { ...TOY_CONFIG, inputWidth: 48, inputHeight: 32, seed: 17, batchSize: 4 };

    const curves: number[][] = [];
    for (let run = 0; run < 2; run++) {
      const { model } = buildModel(cfg);
      const result = await train(model, cfg, {
        steps: 10,
        datasetDir: path.join(dir, "data"),
        manifest,
        split: "all",
      });
      curves.push(result.curve.map((c) => c.loss));
      model.dispose();
    }
    expect(curves[0]).toEqual(curves[1]);
    fs.rmSync(dir, { recursive: true, force: true });
  }, 600000);

  it("writes a per-step loss curve CSV", async () => {
    const dir = tmpdir("dn-csv-");
    genDataset(path.join(dir, "data"), { shape: "cone", views: 2, width: 96, height: 56 });
    const manifest = readManifest(path.join(dir, "data", "manifest.json"));
    const cfg = { ...TOY_CONFIG, inputWidth: 48, inputHeight: 32, seed: 3, batchSize: 2 };
    const { model } = buildModel(cfg);
    const csvPath = path.join(dir, "loss.csv");
    await train(model, cfg, {
      steps: 5,
      datasetDir: path.join(dir, "data"),
      manifest,
      split: "all",
      curveCsv: csvPath,
    });
    const lines = fs.readFileSync(csvPath, "utf8").trim().split("\n");
    expect(lines[0]).toBe("step,loss");
    expect(lines.length).toBe(6);
    expect(Number(lines[1].split(",")[1])).toBeGreaterThan(0);
    model.dispose();
    fs.rmSync(dir, { recursive: true, force: true });
  }, 600000);

  it("rejects an empty train split", async () => {
    const dir = tmpdir("dn-empty-");
    genDataset(path.join(dir, "data"), { shape: "cube", views: 2, width: 96, height: 56 });
    const manifest = readManifest(path.join(dir, "data", "manifest.json"));
    // 2 views -> floor(1.2) = 1 train; filter produces an empty list for a
    // fabricated tag
    const none = { ...manifest, entries: manifest.entries.map((e) => ({ ...e, split_tag: "test" as const })) };
    const cfg = { ...TOY_CONFIG, inputWidth: 48, inputHeight: 32 };
    const { model } = buildModel(cfg);
    await expect(
      train(model, cfg, { steps: 1, datasetDir: path.join(dir, "data"), manifest: none, split: "train" }),
    ).rejects.toThrow(/empty train split/);
    model.dispose();
    fs.rmSync(dir, { recursive: true, force: true });
  }, 600000);

  it("learns the identity task on smooth targets to mse < 1e-3", async () => {
    // depth-as-RGB -> depth on smooth synthetic maps (no step edges, so the
    // half-resolution head is not the limiting factor)
    const dir = tmpdir("dn-ident-");
    const w = 96;
    const h = 56;
    const views = 4;
    fs.mkdirSync(path.join(dir, "maps"), { recursive: true });
    const entries = [];
    for (let i = 0; i < views; i++) {
      const data = new Uint8Array(w * h);
      for (let y = 0; y < h; y++) {
        for (let x = 0; x < w; x++) {
          const cx = (x / w - 0.5) * 2;
          const cy = (y / h - 0.5) * 2;
          const v = Math.exp(-((cx - 0.3 * Math.sin(i)) ** 2 + cy ** 2) * 2.5);
          data[y * w + x] = Math.round(200 * v + 30);
        }
      }
      const rel = `maps/view_${i}.png`;
      writeGray({ width: w, height: h, data }, path.join(dir, rel));
      entries.push({
        index: i,
        azimuth_degrees: (i * 360) / views,
        rgb_path: rel,
        depth_path: rel,
        split_tag: "train",
      });
    }
    fs.writeFileSync(
      path.join(dir, "manifest.json"),
      JSON.stringify({ object_name: "sphere", view_count: views, scene: { width: w, height: h }, entries }),
    );
    const manifest = readManifest(path.join(dir, "manifest.json"));
    const cfg = { ...TOY_CONFIG, inputWidth: w, inputHeight: h, seed: 2, batchSize: views };
    const { model } = buildModel(cfg);
    const result = await train(model, cfg, {
      steps: 120,
      datasetDir: dir,
      manifest,
      split: "all",
    });
    expect(result.finalLoss).toBeLessThan(1e-3);
    model.dispose();
    fs.rmSync(dir, { recursive: true, force: true });
  }, 900000);
});
