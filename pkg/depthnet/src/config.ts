/**
 * Network and training configuration.
 *
 * The full-scale architecture is a DenseNet-161-shaped encoder (initial
 * features 96, growth 48, dense blocks 6/12/36/24) with a bilinear
 * upsampling decoder; widthMultiplier scales every channel count and
 * denseLayerCounts scales block depth so the same code runs as a toy
 * model on a CPU. At widthMultiplier 1 with full dense counts the layer
 * shapes reproduce the published table exactly.
 */

export interface NetConfig {
  /** Channel scale in (0, 1]; 1 reproduces the full architecture. */
  widthMultiplier: number;
  /** Dense layers per block; full scale is [6, 12, 36, 24]. */
  denseLayerCounts: [number, number, number, number];
  /** Working input resolution fed to the network. */
  inputWidth: number;
  inputHeight: number;
  learningRate: number;
  epochs: number;
  batchSize: number;
  seed: number;
  loss: "mse" | "cdd_blend";
}

export const FULL_CONFIG: NetConfig = {
  widthMultiplier: 1.0,
  denseLayerCounts: [6, 12, 36, 24],
  inputWidth: 640,
  inputHeight: 360,
  learningRate: 1e-4,
  epochs: 90,
  batchSize: 4,
  seed: 0,
  loss: "mse",
};

/** Desk-scale defaults: trains in minutes on a CPU. */
export const TOY_CONFIG: NetConfig = {
  widthMultiplier: 0.125,
  denseLayerCounts: [2, 2, 4, 2],
  inputWidth: 96,
  inputHeight: 56,
  learningRate: 1e-2,
  epochs: 60,
  batchSize: 8,
  seed: 0,
  loss: "mse",
};

export const INITIAL_FEATURES = 96;
export const GROWTH_RATE = 48;

export function scaledChannels(base: number, widthMultiplier: number): number {
  return Math.max(1, Math.round(base * widthMultiplier));
}

export function validateConfig(cfg: NetConfig): void {
  if (!(cfg.widthMultiplier > 0 && cfg.widthMultiplier <= 1)) {
    throw new Error(`widthMultiplier must be in (0, 1], got ${cfg.widthMultiplier}`);
  }
  if (cfg.denseLayerCounts.length !== 4 || cfg.denseLayerCounts.some((n) => n < 1)) {
    throw new Error("denseLayerCounts must be four positive integers");
  }
  if (cfg.inputWidth < 1 || cfg.inputHeight < 1) {
    throw new Error("input dimensions must be positive");
  }
  if (cfg.loss !== "mse" && cfg.loss !== "cdd_blend") {
    throw new Error(`loss must be mse or cdd_blend, got ${cfg.loss}`);
  }
}

/**
 * Spatial sizes along the encoder: stem conv (ceil/2), stem pool (ceil/2),
 * then three transition pools (floor/2). Throws if a pooling stage would
 * see fewer than 2 pixels on either axis.
 */
export function encoderSizes(w: number, h: number): Array<[number, number]> {
  const sizes: Array<[number, number]> = [];
  let cw = Math.ceil(w / 2);
  let ch = Math.ceil(h / 2);
  sizes.push([cw, ch]); // after stem conv
  const pool = (n: number, floorMode: boolean) => {
    if (n < 2) {
      throw new Error(
        `input ${w}x${h} is infeasible: a pooling stage reaches size ${n}`);
    }
    return floorMode ? Math.floor(n / 2) : Math.ceil(n / 2);
  };
  cw = pool(cw, false);
  ch = pool(ch, false);
  sizes.push([cw, ch]); // after stem pool
  for (let i = 0; i < 3; i++) {
    cw = pool(cw, true);
    ch = pool(ch, true);
    sizes.push([cw, ch]); // after transition i
  }
  return sizes;
}
