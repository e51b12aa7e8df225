"""Single command-line entry point for the pipeline.

Subcommands: gen (render a dataset), synth (holograms from RGB-D),
encode (Lee rasters for the SLM), recon (numerical reconstruction),
eval (metric reports). Configuration precedence is config file <
HOLOPIPE_* environment variables < command-line flags; unknown config
keys are rejected.

Exit codes: 0 ok, 2 config error, 3 I/O error, 4 data mismatch,
5 internal error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
import traceback
from dataclasses import fields as dataclass_fields
from pathlib import Path

import numpy as np
from PIL import Image

from . import __version__
from .cgh import CHANNEL_SUFFIXES, SynthesisConfig, load_hologram, save_hologram, synthesize
from .imagecore import (
    DataMismatchError,
    load_depth,
    load_manifest,
    load_rgb,
)
from .leecode import SlmSpec, embed_to_slm, lee_encode
from .metrics import MetricReport, acc_cgh, evaluate_depth_pair
from .recon import Region, plane_sweep, reconstruct, save_focus_csv, save_recon_previews
from .scenegen import SceneConfig, generate_dataset

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_MISMATCH = 4
EXIT_INTERNAL = 5

ENV_PREFIX = "HOLOPIPE_"

_SECTIONS = {
    "scene": {f.name for f in dataclass_fields(SceneConfig)},
    "synthesis": {f.name for f in dataclass_fields(SynthesisConfig)},
    "slm": {f.name for f in dataclass_fields(SlmSpec)},
}

_FLOAT_FIELDS = {
    "camera_radius", "object_separation", "near", "far", "margin",
    "object_radius", "vertical_fov", "hologram_pitch",
    "hologram_plane_offset", "pitch",
}
_INT_FIELDS = {"view_count", "width", "height", "seed", "layer_count", "bit_depth"}


class ConfigError(ValueError):
    """Bad configuration file, environment value, or flag."""


# ---------------------------------------------------------------------------
# Configuration merging
# ---------------------------------------------------------------------------


def _coerce(section: str, key: str, value):
    if key == "wavelengths":
        if isinstance(value, str):
            value = [v for v in value.split(",") if v]
        try:
            wl = tuple(float(v) for v in value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{section}.{key}: expected three numbers") from exc
        return wl
    if isinstance(value, str):
        try:
            if key in _INT_FIELDS:
                return int(value)
            if key in _FLOAT_FIELDS:
                return float(value)
        except ValueError as exc:
            raise ConfigError(f"{section}.{key}: cannot parse {value!r}") from exc
    return value


def load_config_file(path) -> dict:
    """Read a JSON config with scene/synthesis/slm sections and a seed."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config root must be an object")
    merged = {"scene": {}, "synthesis": {}, "slm": {}, "seed": None}
    for section, values in doc.items():
        if section == "seed":
            merged["seed"] = int(values)
            continue
        if section not in _SECTIONS:
            raise ConfigError(f"{path}: unknown config section {section!r}")
        if not isinstance(values, dict):
            raise ConfigError(f"{path}: section {section!r} must be an object")
        for key, value in values.items():
            if key not in _SECTIONS[section]:
                raise ConfigError(f"{path}: unknown key {section}.{key}")
            merged[section][key] = _coerce(section, key, value)
    return merged


def apply_env(merged: dict, environ=None) -> dict:
    """Overlay HOLOPIPE_<SECTION>_<FIELD> variables onto a merged config."""
    environ = os.environ if environ is None else environ
    for name, value in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        rest = name[len(ENV_PREFIX):].lower()
        if rest == "seed":
            merged["seed"] = int(value)
            continue
        section, _, key = rest.partition("_")
        if section not in _SECTIONS or key not in _SECTIONS[section]:
            raise ConfigError(f"unknown environment override {name}")
        merged[section][key] = _coerce(section, key, value)
    return merged


def merged_config(args) -> dict:
    merged = {"scene": {}, "synthesis": {}, "slm": {}, "seed": None}
    if getattr(args, "config", None):
        merged_file = load_config_file(args.config)
        for section in ("scene", "synthesis", "slm"):
            merged[section].update(merged_file[section])
        merged["seed"] = merged_file["seed"]
    apply_env(merged)
    return merged


def _build(cls, section: dict, overrides: dict, global_seed):
    values = dict(section)
    for key, val in overrides.items():
        if val is not None:
            values[key] = val
    if global_seed is not None and "seed" not in values and "seed" in {
        f.name for f in dataclass_fields(cls)
    }:
        values["seed"] = global_seed
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def _select_entries(manifest, spec: str):
    if spec == "all":
        return list(manifest.entries)
    if spec in ("train", "test"):
        return [e for e in manifest.entries if e.split_tag == spec]
    try:
        wanted = sorted({int(v) for v in spec.split(",") if v})
    except ValueError as exc:
        raise ConfigError(f"--views must be all/train/test or indices, got {spec!r}") from exc
    by_index = {e.index: e for e in manifest.entries}
    missing = [i for i in wanted if i not in by_index]
    if missing:
        raise ConfigError(f"--views indices not in manifest: {missing}")
    return [by_index[i] for i in wanted]


def _scene_from_manifest(manifest) -> SceneConfig:
    if manifest.scene:
        try:
            return SceneConfig(**manifest.scene)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"manifest scene section invalid: {exc}") from exc
    return SceneConfig(shape=manifest.object_name)


def _holo_prefix(directory: Path, index: int) -> Path:
    return directory / f"view_{index:04d}"


def _run_parallel(jobs: int, work, runner):
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            for fut in [pool.submit(runner, *item) for item in work]:
                fut.result()
    else:
        for item in work:
            runner(*item)


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    merged = merged_config(args)
    overrides = {
        "shape": args.shape,
        "view_count": args.views,
        "width": args.width,
        "height": args.height,
        "seed": args.seed,
    }
    config = _build(SceneConfig, merged["scene"], overrides, merged["seed"])
    manifest = generate_dataset(config, args.out, jobs=args.jobs)
    print(f"gen: wrote {manifest.view_count} views "
          f"({len(manifest.train_entries)} train / {len(manifest.test_entries)} test) "
          f"to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------


def _synth_one(manifest_dir: str, rgb_rel: str, depth_path: str, out_prefix: str,
               synth_config: SynthesisConfig, scene: SceneConfig):
    rgb = load_rgb(Path(manifest_dir) / rgb_rel)
    depth = load_depth(depth_path)
    if (depth.width, depth.height) != (rgb.width, rgb.height):
        raise DataMismatchError(
            f"{depth_path}: depth is {depth.width}x{depth.height}, "
            f"rgb is {rgb.width}x{rgb.height}")
    holo = synthesize(rgb, depth, synth_config, scene)
    save_hologram(holo, out_prefix)


def cmd_synth(args) -> int:
    merged = merged_config(args)
    overrides = {
        "layer_count": args.layers,
        "phase_mode": args.phase_mode,
        "kernel": args.kernel,
        "seed": args.seed,
    }
    synth_config = _build(SynthesisConfig, merged["synthesis"], overrides, merged["seed"])
    manifest = load_manifest(args.manifest)
    scene = _scene_from_manifest(manifest)
    manifest_dir = Path(args.manifest).parent
    entries = _select_entries(manifest, args.views)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    work = []
    for e in entries:
        if args.depth_dir is None:
            depth_path = manifest_dir / e.depth_path
        else:
            depth_path = Path(args.depth_dir) / Path(e.depth_path).name
            if not depth_path.exists():
                raise DataMismatchError(f"view {e.index}: missing external depth {depth_path}")
        work.append((str(manifest_dir), e.rgb_path, str(depth_path),
                     str(_holo_prefix(out, e.index)), synth_config, scene))
    _run_parallel(args.jobs, work, _synth_one)
    print(f"synth: wrote {len(entries)} holograms "
          f"({3 * len(entries)} CFLD files) to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# encode
# ---------------------------------------------------------------------------


def cmd_encode(args) -> int:
    merged = merged_config(args)
    slm = _build(SlmSpec, merged["slm"], {}, None)
    holo_dir = Path(args.holograms)
    prefixes = sorted({p.name[:-7] for p in holo_dir.glob("*_r.cfld")})
    if args.views != "all":
        try:
            wanted = {int(v) for v in args.views.split(",") if v}
        except ValueError as exc:
            raise ConfigError(f"--views must be 'all' or indices, got {args.views!r}") from exc
        prefixes = [p for p in prefixes if int(p.rsplit("_", 1)[1]) in wanted]
    if not prefixes:
        raise DataMismatchError(f"no holograms found under {holo_dir}")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in prefixes:
        holo = load_hologram(holo_dir / name)
        sidecar = {"layout": {"subcells_per_pixel": 4, "axis": "horizontal",
                              "order": ["L1", "L2", "L3", "L4"]},
                   "panel": {"width": slm.width, "height": slm.height,
                             "pitch": slm.pitch, "bit_depth": slm.bit_depth},
                   "channels": {}}
        active_w = 4 * holo.width
        sidecar["layout"]["active_region"] = {
            "x0": (slm.width - active_w) // 2,
            "y0": (slm.height - holo.height) // 2,
            "width": active_w,
            "height": holo.height,
        }
        for suffix, channel in zip(CHANNEL_SUFFIXES, holo.channels):
            cgh = lee_encode(channel)
            raster = embed_to_slm(cgh, slm)
            path = out / f"{name}_slm_{suffix}.png"
            Image.fromarray(raster, "L").save(path, format="PNG")
            sidecar["channels"][suffix] = {"scale": cgh.scale,
                                           "wavelength": channel.wavelength,
                                           "raster": path.name}
        (out / f"{name}_slm.json").write_text(json.dumps(sidecar, indent=2) + "\n")
    print(f"encode: wrote {3 * len(prefixes)} SLM rasters to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# recon
# ---------------------------------------------------------------------------


def _parse_regions(spec: str):
    regions = []
    for part in spec.split(";"):
        if not part:
            continue
        try:
            x0, y0, x1, y1 = (int(v) for v in part.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad region {part!r}; expected x0,y0,x1,y1") from exc
        regions.append(Region(x0, y0, x1, y1))
    if not regions:
        raise ConfigError("no regions given")
    return regions


def cmd_recon(args) -> int:
    holo = load_hologram(args.hologram)
    try:
        distances = [float(v) for v in args.distances.split(",") if v]
    except ValueError as exc:
        raise ConfigError(f"bad --distances {args.distances!r}") from exc
    if not distances:
        raise ConfigError("need at least one distance")
    out_prefix = Path(args.out)
    out_prefix.parent.mkdir(parents=True, exist_ok=True)
    for k, d in enumerate(distances):
        plane = reconstruct(holo, d)
        save_recon_previews(plane, f"{out_prefix}_d{k}")
    if args.regions:
        regions = _parse_regions(args.regions)
        curves = plane_sweep(holo, distances, regions)
        save_focus_csv(curves, f"{out_prefix}_focus.csv")
        for i, c in enumerate(curves):
            print(f"recon: region {i} best focus at {c.best_distance:.6f} m")
    print(f"recon: wrote {len(distances)} planes to {out_prefix}_d*.png")
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def _cgh_acc_per_channel(est_prefix: Path, ref_prefix: Path) -> dict:
    est = load_hologram(est_prefix)
    ref = load_hologram(ref_prefix)
    values = {}
    for suffix, ech, rch in zip(CHANNEL_SUFFIXES, est.channels, ref.channels):
        values[f"cgh_acc_{suffix}"] = acc_cgh(lee_encode(ech), lee_encode(rch))
    return values


def cmd_eval(args) -> int:
    manifest = load_manifest(args.manifest)
    manifest_dir = Path(args.manifest).parent
    entries = _select_entries(manifest, args.views)
    report = MetricReport()
    for e in entries:
        gt = load_depth(manifest_dir / e.depth_path)
        est_path = Path(args.estimated) / Path(e.depth_path).name
        if not est_path.exists():
            raise DataMismatchError(f"view {e.index}: missing estimated depth {est_path}")
        est = load_depth(est_path)
        if (est.width, est.height) != (gt.width, gt.height):
            raise DataMismatchError(
                f"{est_path}: estimated depth is {est.width}x{est.height}, "
                f"ground truth is {gt.width}x{gt.height}")
        try:
            values = evaluate_depth_pair(est, gt)
        except ValueError as exc:
            raise DataMismatchError(f"view {e.index}: {exc}") from exc
        if args.cgh_est and args.cgh_ref:
            est_prefix = _holo_prefix(Path(args.cgh_est), e.index)
            ref_prefix = _holo_prefix(Path(args.cgh_ref), e.index)
            values.update(_cgh_acc_per_channel(est_prefix, ref_prefix))
        report.add(manifest.object_name, e.index, values)

    if args.report_csv:
        Path(args.report_csv).parent.mkdir(parents=True, exist_ok=True)
        report.to_csv(args.report_csv)
    if args.report_json:
        Path(args.report_json).parent.mkdir(parents=True, exist_ok=True)
        report.to_json(args.report_json)
    for obj in report.objects():
        agg = report.aggregate(obj)
        acc_mean, acc_std = agg["acc"]
        print(f"eval: {obj} over {len(entries)} views, acc {acc_mean:.4f} ± {acc_std:.4f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser and dispatch
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holopipe",
        description="Synthetic RGB-D rendering, hologram synthesis, Lee encoding, "
                    "reconstruction, and depth metrics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file (file < env < flags)")
        p.add_argument("--jobs", type=int, default=1, help="parallel view workers")

    p = sub.add_parser("gen", help="render a multi-view RGB-D dataset")
    common(p)
    p.add_argument("--out", default="data", help="output dataset directory")
    p.add_argument("--shape", choices=("torus", "cube", "cone", "sphere"))
    p.add_argument("--views", type=int, help="number of views")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("synth", help="synthesize holograms from RGB-D pairs")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default="holograms")
    p.add_argument("--views", default="all", help="all, train, test, or indices")
    p.add_argument("--depth-dir", help="external depth directory (default: ground truth)")
    p.add_argument("--layers", type=int, help="layer count (1..256)")
    p.add_argument("--phase-mode", choices=("seeded_random", "constant_zero"))
    p.add_argument("--kernel", choices=("angular_spectrum", "fresnel"))
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("encode", help="Lee-encode holograms to SLM rasters")
    common(p)
    p.add_argument("--holograms", required=True, help="directory of CFLD holograms")
    p.add_argument("--out", default="slm")
    p.add_argument("--views", default="all")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("recon", help="numerically reconstruct a hologram")
    common(p)
    p.add_argument("--hologram", required=True, help="hologram prefix (no _r.cfld)")
    p.add_argument("--distances", required=True, help="comma-separated meters")
    p.add_argument("--regions", help="x0,y0,x1,y1;... focus regions")
    p.add_argument("--out", default="recon/plane")
    p.set_defaults(func=cmd_recon)

    p = sub.add_parser("eval", help="score estimated depth maps against ground truth")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--estimated", required=True, help="directory of estimated depth PNGs")
    p.add_argument("--views", default="all")
    p.add_argument("--cgh-est", help="hologram dir for estimated depth (Eq. 11 columns)")
    p.add_argument("--cgh-ref", help="hologram dir for ground-truth depth")
    p.add_argument("--report-csv")
    p.add_argument("--report-json")
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"holopipe: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataMismatchError as exc:
        print(f"holopipe: data mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except OSError as exc:
        print(f"holopipe: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"holopipe: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
