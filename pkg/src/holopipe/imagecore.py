"""Shared raster/field types and bit-exact file I/O.

Every stage of the pipeline trades in three carriers: 8-bit RGB views,
8-bit gray depth maps (255 = nearest plane, 0 = farthest), and complex
scalar fields with a physical pixel pitch and wavelength. All types are
immutable after construction; loading and saving are exact inverses on
valid inputs.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

__all__ = [
    "DataMismatchError",
    "RgbImage",
    "DepthMap",
    "ComplexField",
    "ManifestEntry",
    "ViewManifest",
    "load_rgb",
    "save_rgb",
    "load_depth",
    "save_depth",
    "load_field",
    "save_field",
    "load_manifest",
    "save_manifest",
    "depth_gray_to_distance",
    "distance_to_depth_gray",
]

CFLD_MAGIC = b"CFLD"
CFLD_VERSION = 1
_CFLD_HEADER = struct.Struct("<4sIIIdd")  # magic, version, width, height, pitch, wavelength


class DataMismatchError(ValueError):
    """Inputs that are individually valid but mutually inconsistent."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class RgbImage:
    """8-bit RGB raster, row-major, shape (height, width, 3)."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 3 or d.shape[2] != 3 or d.dtype != np.uint8:
            raise ValueError(f"RgbImage needs (h, w, 3) uint8 data, got {d.shape} {d.dtype}")
        if d.shape[0] < 1 or d.shape[1] < 1:
            raise ValueError("invalid dimensions: width and height must be >= 1")
        object.__setattr__(self, "data", _frozen(d))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class DepthMap:
    """8-bit gray depth raster; gray 255 = nearest plane, 0 = farthest."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 2 or d.dtype != np.uint8:
            raise ValueError(f"DepthMap needs (h, w) uint8 data, got {d.shape} {d.dtype}")
        if d.shape[0] < 1 or d.shape[1] < 1:
            raise ValueError("invalid dimensions: width and height must be >= 1")
        object.__setattr__(self, "data", _frozen(d))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class ComplexField:
    """Complex scalar field on a square-pixel grid.

    pitch is the physical pixel spacing in meters, wavelength the design
    wavelength in meters. data is complex128, shape (height, width).
    """

    data: np.ndarray
    pitch: float
    wavelength: float

    def __post_init__(self):
        d = self.data
        if d.ndim != 2 or d.dtype != np.complex128:
            raise ValueError(f"ComplexField needs (h, w) complex128 data, got {d.shape} {d.dtype}")
        if d.shape[0] < 1 or d.shape[1] < 1:
            raise ValueError("invalid dimensions: width and height must be >= 1")
        if not (self.pitch > 0):
            raise ValueError("pitch must be > 0")
        if not (self.wavelength > 0):
            raise ValueError("wavelength must be > 0")
        object.__setattr__(self, "data", _frozen(d))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


# ---------------------------------------------------------------------------
# PNG I/O
# ---------------------------------------------------------------------------


def load_rgb(path) -> RgbImage:
    """Load an 8-bit RGB PNG. Raises on missing files and non-RGB rasters."""
    with Image.open(path) as img:
        if img.mode != "RGB":
            raise ValueError(f"{path}: expected 8-bit RGB, got mode {img.mode!r}")
        arr = np.asarray(img, dtype=np.uint8)
    return RgbImage(arr)


def save_rgb(image: RgbImage, path) -> None:
    Image.fromarray(image.data, "RGB").save(path, format="PNG")


def load_depth(path) -> DepthMap:
    """Load an 8-bit gray depth PNG.

    Single-channel files are taken as-is; 3-channel files are accepted
    only when R = G = B everywhere.
    """
    with Image.open(path) as img:
        if img.mode == "L":
            arr = np.asarray(img, dtype=np.uint8)
        elif img.mode == "RGB":
            rgb = np.asarray(img, dtype=np.uint8)
            if np.any(rgb[:, :, 0] != rgb[:, :, 1]) or np.any(rgb[:, :, 0] != rgb[:, :, 2]):
                raise ValueError(f"{path}: 3-channel depth file has unequal channels")
            arr = rgb[:, :, 0].copy()
        else:
            raise ValueError(f"{path}: expected 8-bit gray depth, got mode {img.mode!r}")
    return DepthMap(arr)


def save_depth(depth: DepthMap, path) -> None:
    Image.fromarray(depth.data, "L").save(path, format="PNG")


# ---------------------------------------------------------------------------
# CFLD complex-field container
# ---------------------------------------------------------------------------
# No established interchange format carries pitch + wavelength, so fields use
# a small binary container: magic "CFLD"; little-endian u32 version (= 1),
# width, height; f64 pitch, wavelength; then width*height*2 little-endian f64
# (real, imag interleaved, row-major).


def save_field(fld: ComplexField, path) -> None:
    header = _CFLD_HEADER.pack(
        CFLD_MAGIC, CFLD_VERSION, fld.width, fld.height, fld.pitch, fld.wavelength
    )
    payload = np.ascontiguousarray(fld.data.astype("<c16", copy=False))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())


def load_field(path) -> ComplexField:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _CFLD_HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, version, width, height, pitch, wavelength = _CFLD_HEADER.unpack_from(raw)
    if magic != CFLD_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != CFLD_VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    if width < 1 or height < 1:
        raise ValueError(f"{path}: invalid dimensions {width}x{height}")
    expected = _CFLD_HEADER.size + width * height * 16
    if len(raw) != expected:
        raise ValueError(f"{path}: size mismatch (expected {expected} bytes, got {len(raw)})")
    data = np.frombuffer(raw, dtype="<c16", offset=_CFLD_HEADER.size).reshape(height, width)
    return ComplexField(data.astype(np.complex128), pitch=pitch, wavelength=wavelength)


# ---------------------------------------------------------------------------
# Depth gray <-> metric distance
# ---------------------------------------------------------------------------


def depth_gray_to_distance(gray, geometry):
    """Map depth gray levels to metric distance along the optical axis.

    Affine and strictly decreasing: gray 255 -> geometry.near, gray 0 ->
    geometry.far. Accepts scalars or arrays; real-valued gray is allowed
    (layer bin centers land between integer levels).
    """
    near, far = geometry.near, geometry.far
    if not near < far:
        raise ValueError("geometry.near must be < geometry.far")
    return far - (np.asarray(gray, dtype=np.float64) / 255.0) * (far - near)


def distance_to_depth_gray(distance, geometry):
    """Inverse of depth_gray_to_distance; returns real-valued gray (unrounded)."""
    near, far = geometry.near, geometry.far
    if not near < far:
        raise ValueError("geometry.near must be < geometry.far")
    return 255.0 * (far - np.asarray(distance, dtype=np.float64)) / (far - near)


# ---------------------------------------------------------------------------
# View manifest
# ---------------------------------------------------------------------------

SHAPES = ("torus", "cube", "cone", "sphere")
SPLIT_TAGS = ("train", "test")


@dataclass(frozen=True)
class ManifestEntry:
    index: int
    azimuth_degrees: float
    rgb_path: str
    depth_path: str
    split_tag: str


@dataclass(frozen=True)
class ViewManifest:
    """Per-view index of a generated dataset.

    Paths are relative to the manifest's own directory. The scene dict
    records the generating geometry so downstream stages can map depth
    gray back to metric distance.
    """

    object_name: str
    view_count: int
    entries: tuple
    scene: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.object_name not in SHAPES:
            raise ValueError(f"object_name must be one of {SHAPES}, got {self.object_name!r}")
        if self.view_count < 1 or len(self.entries) != self.view_count:
            raise ValueError("entry count must equal view_count")
        step = 360.0 / self.view_count
        for e in self.entries:
            if e.split_tag not in SPLIT_TAGS:
                raise ValueError(f"bad split_tag {e.split_tag!r}")
            if e.azimuth_degrees != e.index * step:
                raise ValueError(f"entry {e.index}: azimuth must be index * 360 / view_count")
        object.__setattr__(self, "entries", tuple(self.entries))

    @property
    def train_entries(self) -> tuple:
        return tuple(e for e in self.entries if e.split_tag == "train")

    @property
    def test_entries(self) -> tuple:
        return tuple(e for e in self.entries if e.split_tag == "test")


def save_manifest(manifest: ViewManifest, path) -> None:
    doc = {
        "object_name": manifest.object_name,
        "view_count": manifest.view_count,
        "scene": manifest.scene,
        "entries": [
            {
                "index": e.index,
                "azimuth_degrees": e.azimuth_degrees,
                "rgb_path": e.rgb_path,
                "depth_path": e.depth_path,
                "split_tag": e.split_tag,
            }
            for e in manifest.entries
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_manifest(path) -> ViewManifest:
    doc = json.loads(Path(path).read_text())
    try:
        entries = tuple(
            ManifestEntry(
                index=int(e["index"]),
                azimuth_degrees=float(e["azimuth_degrees"]),
                rgb_path=str(e["rgb_path"]),
                depth_path=str(e["depth_path"]),
                split_tag=str(e["split_tag"]),
            )
            for e in doc["entries"]
        )
        return ViewManifest(
            object_name=str(doc["object_name"]),
            view_count=int(doc["view_count"]),
            entries=entries,
            scene=dict(doc.get("scene", {})),
        )
    except KeyError as exc:
        raise ValueError(f"{path}: manifest missing key {exc}") from exc
