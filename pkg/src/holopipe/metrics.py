"""Depth-map quality metrics and CGH similarity.

The eight depth indicators (mse, ssim, psnr, acc, abs_rel, sq_rel, rmse,
lrmse) plus the joint-RGB CGH accuracy. mse/psnr/acc run on the 0-255
gray scale; the relative-error family runs on gray/255 in [0, 1]. SSIM
is the global single-window variant with population statistics, which
is what makes dark-background depth maps score ~0.9999.

All accumulation is numpy float64 over row-major arrays in a single
thread, so results are reproducible regardless of caller concurrency.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np

from .imagecore import DataMismatchError, DepthMap

__all__ = [
    "mse", "ssim", "psnr", "psnr_from_mse", "acc_depth", "acc_cgh",
    "error_stats", "ErrorStats", "evaluate_depth_pair",
    "MetricRow", "MetricReport", "METRIC_COLUMNS",
]

METRIC_COLUMNS = ("mse", "ssim", "psnr_db", "acc", "abs_rel", "sq_rel",
                  "rmse", "lrmse", "cgh_acc_r", "cgh_acc_g", "cgh_acc_b")


def _as_array(x) -> np.ndarray:
    if isinstance(x, DepthMap):
        return x.data.astype(np.float64)
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim < 1:
        raise ValueError("expected an image-like array")
    return arr


def _pair(y, y_ref):
    a, b = _as_array(y), _as_array(y_ref)
    if a.shape != b.shape:
        raise DataMismatchError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def mse(y, y_ref) -> float:
    """Mean squared error, pointwise over all pixels."""
    a, b = _pair(y, y_ref)
    d = a - b
    return float(np.mean(d * d))


def ssim(y, y_ref, dynamic_range: float = 255.0, k1: float = 0.01, k2: float = 0.03) -> float:
    """Global single-window structural similarity.

    Population variance/covariance over the whole image; stabilizers
    c1 = (k1 L)^2, c2 = (k2 L)^2 with L the dynamic range (255 for 8-bit).
    """
    a, b = _pair(y, y_ref)
    c1 = (k1 * dynamic_range) ** 2
    c2 = (k2 * dynamic_range) ** 2
    mu_a = float(np.mean(a))
    mu_b = float(np.mean(b))
    var_a = float(np.mean(a * a)) - mu_a * mu_a
    var_b = float(np.mean(b * b)) - mu_b * mu_b
    cov = float(np.mean(a * b)) - mu_a * mu_b
    return ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / (
        (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    )


def psnr_from_mse(mse_value: float, peak: float = 255.0) -> float:
    """10 log10(peak^2 / mse); math.inf when mse is zero."""
    if mse_value < 0:
        raise ValueError("mse must be nonnegative")
    if mse_value == 0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse_value)


def psnr(y, y_ref, peak: float = 255.0) -> float:
    """Peak signal-to-noise ratio in dB; math.inf marks identical inputs."""
    return psnr_from_mse(mse(y, y_ref), peak=peak)


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    num = float(np.sum(a * b))
    den = math.sqrt(float(np.sum(a * a)) * float(np.sum(b * b)))
    if den == 0:
        raise ValueError("all-zero input (zero denominator)")
    return num / den


def acc_depth(y, y_ref) -> float:
    """Normalized correlation sum(I I') / sqrt(sum I^2 sum I'^2).

    Equals 1 for identical inputs and for y = k * y_ref with k > 0; raises
    on an all-zero input.
    """
    a, b = _pair(y, y_ref)
    return _cosine(a, b)


def _cgh_planes(c) -> np.ndarray:
    # LeeCgh carries four quantized 8-bit coefficient planes; rasters come
    # in as (h, w) or (h, w, channels) arrays of brightness values.
    q = getattr(c, "quantized", None)
    if q is not None:
        return np.asarray(q, dtype=np.float64)
    arr = np.asarray(c, dtype=np.float64)
    if arr.ndim not in (2, 3, 4):
        raise ValueError("CGH raster must have 2 to 4 dimensions")
    return arr


def acc_cgh(c, c_ref) -> float:
    """CGH accuracy: one cosine over all pixels and color planes jointly."""
    a = _cgh_planes(c)
    b = _cgh_planes(c_ref)
    if a.shape != b.shape:
        raise DataMismatchError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return _cosine(a, b)


class ErrorStats(NamedTuple):
    abs_rel: float
    sq_rel: float
    rmse: float
    lrmse: float


def error_stats(y, y_ref, printed_sq_rel: bool = True) -> ErrorStats:
    """Relative-error family on depths normalized to [0, 1].

    DepthMap inputs are divided by 255; float arrays are taken as already
    normalized. Pixels with zero ground truth are excluded from abs_rel,
    sq_rel and lrmse (gray-0 backgrounds would be singular); rmse runs
    over all pixels. sq_rel divides by y'^2 as printed in the source
    formula; printed_sq_rel=False selects the conventional y' divisor.
    """
    if isinstance(y, DepthMap) != isinstance(y_ref, DepthMap):
        raise DataMismatchError("mixed DepthMap and array inputs")
    scale = 255.0 if isinstance(y, DepthMap) else 1.0
    a, b = _pair(y, y_ref)
    a = a / scale
    b = b / scale

    mask = b > 0
    n_masked = int(np.count_nonzero(mask))
    if n_masked == 0:
        raise ValueError("empty mask: ground truth is zero everywhere")
    am, bm = a[mask], b[mask]

    diff = am - bm
    abs_rel = float(np.mean(np.abs(diff) / bm))
    if printed_sq_rel:
        sq_rel = float(np.mean(diff * diff / (bm * bm)))
    else:
        sq_rel = float(np.mean(diff * diff / bm))
    rmse = float(np.sqrt(np.mean((a - b) ** 2)))
    with np.errstate(divide="ignore"):
        log_diff = np.log(am) - np.log(bm)
    lrmse = float(np.sqrt(np.mean(log_diff * log_diff)))
    return ErrorStats(abs_rel, sq_rel, rmse, lrmse)


def evaluate_depth_pair(estimated: DepthMap, reference: DepthMap) -> dict:
    """All eight depth metrics for one estimated/ground-truth pair."""
    stats = error_stats(estimated, reference)
    return {
        "mse": mse(estimated, reference),
        "ssim": ssim(estimated, reference),
        "psnr_db": psnr(estimated, reference),
        "acc": acc_depth(estimated, reference),
        "abs_rel": stats.abs_rel,
        "sq_rel": stats.sq_rel,
        "rmse": stats.rmse,
        "lrmse": stats.lrmse,
    }


# ---------------------------------------------------------------------------
# Report container
# ---------------------------------------------------------------------------


def _fmt(value: Optional[float]) -> str:
    if value is None:
        return ""
    if math.isinf(value):
        return "inf"
    return repr(float(value))


def _fmt_mean_std(mean: float, std: float) -> str:
    if math.isinf(mean):
        return "inf"
    return f"{mean:.4f} ± {std:.4f}"


@dataclass(frozen=True)
class MetricRow:
    object_name: str
    view: int
    values: dict  # metric name -> float (math.inf allowed), subset of METRIC_COLUMNS


@dataclass
class MetricReport:
    """Per-view metric table with per-object mean ± std aggregate rows."""

    rows: list = field(default_factory=list)

    def add(self, object_name: str, view: int, values: dict) -> None:
        unknown = set(values) - set(METRIC_COLUMNS)
        if unknown:
            raise ValueError(f"unknown metric columns: {sorted(unknown)}")
        self.rows.append(MetricRow(object_name, view, dict(values)))

    def objects(self) -> list:
        seen = []
        for r in self.rows:
            if r.object_name not in seen:
                seen.append(r.object_name)
        return seen

    def aggregate(self, object_name: str) -> dict:
        """Per-metric (mean, std) over views; population std (ddof=0)."""
        out = {}
        rows = [r for r in self.rows if r.object_name == object_name]
        for col in METRIC_COLUMNS:
            vals = [r.values[col] for r in rows if col in r.values]
            if not vals:
                continue
            arr = np.asarray(vals, dtype=np.float64)
            if np.any(np.isinf(arr)):
                out[col] = (math.inf, math.inf)
            else:
                out[col] = (float(np.mean(arr)), float(np.std(arr)))
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("object", "view") + METRIC_COLUMNS)
            for r in self.rows:
                w.writerow([r.object_name, r.view]
                           + [_fmt(r.values.get(c)) for c in METRIC_COLUMNS])
            for obj in self.objects():
                agg = self.aggregate(obj)
                w.writerow([obj, "all"]
                           + [_fmt_mean_std(*agg[c]) if c in agg else ""
                              for c in METRIC_COLUMNS])

    def to_json(self, path) -> None:
        doc = {"objects": {}}
        for obj in self.objects():
            views = []
            for r in self.rows:
                if r.object_name != obj:
                    continue
                vals = {}
                for c in METRIC_COLUMNS:
                    if c in r.values:
                        v = r.values[c]
                        vals[c] = "inf" if math.isinf(v) else v
                views.append({"view": r.view, **vals})
            agg = {
                c: {"mean": "inf" if math.isinf(m) else m,
                    "std": "inf" if math.isinf(s) else s,
                    "formatted": _fmt_mean_std(m, s)}
                for c, (m, s) in self.aggregate(obj).items()
            }
            doc["objects"][obj] = {"views": views, "aggregate": agg}
        Path(path).write_text(json.dumps(doc, indent=2) + "\n")
