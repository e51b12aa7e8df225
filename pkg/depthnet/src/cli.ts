/**
 * depthnet command line.
 *
 *   train   --manifest data/manifest.json --out runs/toy [--steps N]
 *           [--loss mse|cdd_blend] [--seed S] [--lr R] [--width-multiplier M]
 *           [--input-width W --input-height H] [--split train|all]
 *           [--full] [--curve runs/toy/loss.csv]
 *   predict --checkpoint runs/toy --manifest data/manifest.json
 *           --out predictions [--split test|all]
 *   shapes  [--full]    print the layer shape chain
 */

import * as path from "path";

import { FULL_CONFIG, NetConfig, TOY_CONFIG } from "./config";
import { readManifest } from "./data";
import { loadCheckpoint, saveCheckpoint } from "./io";
import { buildModel } from "./model";
import { predictAll } from "./predict";
import { train } from "./train";

function parseArgs(argv: string[]): Map<string, string> {
  const args = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const token = argv[i];
    if (!token.startsWith("--")) {
      throw new Error(`unexpected argument ${token}`);
    }
    const key = token.slice(2);
    if (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
      args.set(key, argv[++i]);
    } else {
      args.set(key, "true");
    }
  }
  return args;
}

function configFrom(args: Map<string, string>): NetConfig {
  const cfg: NetConfig = { ...(args.has("full") ? FULL_CONFIG : TOY_CONFIG) };
  if (args.has("width-multiplier")) cfg.widthMultiplier = Number(args.get("width-multiplier"));
  if (args.has("input-width")) cfg.inputWidth = Number(args.get("input-width"));
  if (args.has("input-height")) cfg.inputHeight = Number(args.get("input-height"));
  if (args.has("lr")) cfg.learningRate = Number(args.get("lr"));
  if (args.has("batch")) cfg.batchSize = Number(args.get("batch"));
  if (args.has("seed")) cfg.seed = Number(args.get("seed"));
  if (args.has("loss")) cfg.loss = args.get("loss") as NetConfig["loss"];
  if (args.has("dense-counts")) {
    const counts = (args.get("dense-counts") as string).split(",").map(Number);
    cfg.denseLayerCounts = counts as NetConfig["denseLayerCounts"];
  }
  return cfg;
}

function need(args: Map<string, string>, key: string): string {
  const v = args.get(key);
  if (!v) throw new Error(`missing required --${key}`);
  return v;
}

async function cmdTrain(args: Map<string, string>): Promise<void> {
  const cfg = configFrom(args);
  const manifestPath = need(args, "manifest");
  const outDir = need(args, "out");
  const manifest = readManifest(manifestPath);
  const { model } = buildModel(cfg);
  const steps = Number(args.get("steps") ?? "200");
  const result = await train(model, cfg, {
    steps,
    datasetDir: path.dirname(manifestPath),
    manifest,
    split: (args.get("split") as "train" | "all") ?? "train",
    curveCsv: args.get("curve") ?? path.join(outDir, "loss.csv"),
    logEvery: Number(args.get("log-every") ?? "25"),
  });
  await saveCheckpoint(model, cfg, outDir);
  console.log(
    `trained ${steps} steps: loss ${result.initialLoss.toExponential(3)} -> ` +
      `${result.finalLoss.toExponential(3)}; checkpoint at ${outDir}`,
  );
}

async function cmdPredict(args: Map<string, string>): Promise<void> {
  const checkpointDir = need(args, "checkpoint");
  const manifestPath = need(args, "manifest");
  const outDir = need(args, "out");
  const { model, cfg } = await loadCheckpoint(checkpointDir);
  const manifest = readManifest(manifestPath);
  const split = (args.get("split") as "test" | "all") ?? "test";
  const records = await predictAll(
    model,
    cfg,
    manifest,
    path.dirname(manifestPath),
    split,
    outDir,
  );
  console.log(`wrote ${records.length} depth maps to ${outDir}`);
}

function cmdShapes(args: Map<string, string>): void {
  const cfg = configFrom(args);
  const { taps } = buildModel(cfg);
  for (const [stage, [c, w, h]] of Object.entries(taps)) {
    console.log(`${stage.padEnd(12)} ch=${String(c).padEnd(5)} shape=${w}x${h}`);
  }
}

async function main(): Promise<number> {
  const [command, ...rest] = process.argv.slice(2);
  try {
    const args = parseArgs(rest);
    if (command === "train") await cmdTrain(args);
    else if (command === "predict") await cmdPredict(args);
    else if (command === "shapes") cmdShapes(args);
    else {
      console.error("usage: depthnet <train|predict|shapes> [options]");
      return 2;
    }
    return 0;
  } catch (err) {
    console.error(`depthnet: ${(err as Error).message}`);
    return 1;
  }
}

main().then((code) => {
  process.exitCode = code;
});
