"""Numerical reconstruction and focus analysis.

Reconstructing a hologram at a focal distance propagates each channel
forward and takes squared magnitude. A plane sweep scores rectangular
regions with the Tenengrad measure (mean squared Sobel gradient of the
green-channel intensity) across distances; the per-region argmax is the
numerical analogue of the accommodation demonstration: a region focuses
where its object actually sits.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .cgh import Hologram, propagate
from .imagecore import DataMismatchError

__all__ = ["Region", "ReconPlane", "FocusCurve", "reconstruct", "tenengrad",
           "plane_sweep", "save_recon_previews", "save_focus_csv"]


@dataclass(frozen=True)
class Region:
    """Half-open pixel rectangle [x0, x1) x [y0, y1)."""

    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise ValueError("empty region")

    def crop(self, arr: np.ndarray) -> np.ndarray:
        h, w = arr.shape
        if self.x0 < 0 or self.y0 < 0 or self.x1 > w or self.y1 > h:
            raise ValueError(f"region {self} outside {w}x{h} image")
        return arr[self.y0:self.y1, self.x0:self.x1]


@dataclass(frozen=True)
class ReconPlane:
    """Intensity at one focal distance: (3, h, w) nonnegative reals."""

    distance: float
    intensity: np.ndarray

    def __post_init__(self):
        if self.intensity.ndim != 3 or self.intensity.shape[0] != 3:
            raise ValueError("intensity must be (3, h, w)")
        if np.any(self.intensity < 0):
            raise ValueError("intensity must be nonnegative")

    def channel(self, index: int) -> np.ndarray:
        return self.intensity[index]

    def preview_channel(self, index: int) -> np.ndarray:
        """8-bit view of one channel, max-normalized."""
        return _to_u8(self.intensity[index])

    def preview_rgb(self) -> np.ndarray:
        """Merged 8-bit RGB preview; each channel max-normalized."""
        return np.stack([_to_u8(self.intensity[k]) for k in range(3)], axis=-1)


def _to_u8(plane: np.ndarray) -> np.ndarray:
    peak = plane.max()
    if peak <= 0:
        return np.zeros(plane.shape, dtype=np.uint8)
    return np.rint(plane / peak * 255).astype(np.uint8)


def reconstruct(holo: Hologram, distance: float) -> ReconPlane:
    """Propagate all channels by +distance and return squared magnitudes."""
    if not 0 < distance <= 1.0:
        raise ValueError("distance must be in (0, 1] meters")
    intensity = np.stack([
        np.abs(propagate(ch, distance).data) ** 2 for ch in holo.channels
    ])
    return ReconPlane(distance=distance, intensity=intensity)


def tenengrad(intensity: np.ndarray) -> float:
    """Mean squared Sobel gradient magnitude over the interior pixels."""
    a = np.asarray(intensity, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 3 or a.shape[1] < 3:
        raise ValueError("focus region must be at least 3x3 pixels")
    gx = ((a[:-2, 2:] + 2 * a[1:-1, 2:] + a[2:, 2:])
          - (a[:-2, :-2] + 2 * a[1:-1, :-2] + a[2:, :-2]))
    gy = ((a[2:, :-2] + 2 * a[2:, 1:-1] + a[2:, 2:])
          - (a[:-2, :-2] + 2 * a[:-2, 1:-1] + a[:-2, 2:]))
    return float(np.mean(gx * gx + gy * gy))


@dataclass(frozen=True)
class FocusCurve:
    region: Region
    distances: tuple
    scores: tuple

    @property
    def best_distance(self) -> float:
        return self.distances[int(np.argmax(self.scores))]


def plane_sweep(holo: Hologram, distances, regions) -> list:
    """Score each region at each distance; green-channel Tenengrad.

    Returns one FocusCurve per region (same order). Distances are swept
    in the order given and results are deterministic.
    """
    distances = tuple(float(d) for d in distances)
    if len(distances) < 2:
        raise ValueError("need at least two sweep distances")
    regions = tuple(regions)
    if not regions:
        raise ValueError("need at least one region")
    scores = {i: [] for i in range(len(regions))}
    for d in distances:
        plane = reconstruct(holo, d)
        green = plane.channel(1)
        for i, region in enumerate(regions):
            scores[i].append(tenengrad(region.crop(green)))
    return [FocusCurve(region=r, distances=distances, scores=tuple(scores[i]))
            for i, r in enumerate(regions)]


def save_recon_previews(plane: ReconPlane, prefix) -> list:
    """Write per-channel and merged previews: <prefix>_{r,g,b,rgb}.png."""
    prefix = Path(prefix)
    paths = []
    for k, suffix in enumerate(("r", "g", "b")):
        p = prefix.parent / f"{prefix.name}_{suffix}.png"
        Image.fromarray(plane.preview_channel(k), "L").save(p, format="PNG")
        paths.append(p)
    p = prefix.parent / f"{prefix.name}_rgb.png"
    Image.fromarray(plane.preview_rgb(), "RGB").save(p, format="PNG")
    paths.append(p)
    return paths


def save_focus_csv(curves, path) -> None:
    """Focus curves as CSV rows (distance, region, score)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("distance", "region", "score"))
        for i, curve in enumerate(curves):
            for d, s in zip(curve.distances, curve.scores):
                w.writerow((repr(d), i, repr(s)))
