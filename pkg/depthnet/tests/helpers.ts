import { spawnSync } from "child_process";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";

/** Invoke the rendering/hologram pipeline CLI; throws on nonzero exit. */
export function holopipe(args: string[]): string {
  const res = spawnSync("python3", ["-m", "holopipe.cli", ...args], {
    encoding: "utf8",
    timeout: 15 * 60 * 1000,
  });
  if (res.status !== 0) {
    throw new Error(
      `holopipe ${args.join(" ")} exited ${res.status}\n${res.stdout}\n${res.stderr}`,
    );
  }
  return res.stdout;
}

export function tmpdir(prefix: string): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), prefix));
}

/** Scene overrides are passed through a JSON config file. */
export function genDataset(
  out: string,
  opts: { shape: string; views: number; width: number; height: number; scene?: object },
): void {
  const cfgPath = path.join(out + "-cfg.json");
  fs.writeFileSync(cfgPath, JSON.stringify({ scene: opts.scene ?? {} }));
  holopipe([
    "gen", "--config", cfgPath, "--out", out, "--shape", opts.shape,
    "--views", String(opts.views), "--width", String(opts.width),
    "--height", String(opts.height),
  ]);
}
