"""Synthetic 360-degree RGB-D renderer.

Two identical primitives sit on the z-axis at (0, 0, +sep/2) and
(0, 0, -sep/2); a perspective camera orbits the origin on a circle of
radius camera_radius in the y = 0 plane. Depth is the hit point's
distance along the camera's optical axis, mapped affinely to gray
(255 = near plane, 0 = far plane); pixels with no hit get gray 0.
Shading is flat Lambert under one directional light fixed in the camera
frame, so renders are deterministic and a y-symmetric scene looks
identical from every azimuth.

Intersections are analytic (sphere, axis-aligned cube, capped cone);
the torus is solved by bracketed bisection on the ray to 1e-9 m.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .imagecore import (
    DepthMap,
    ManifestEntry,
    RgbImage,
    SHAPES,
    ViewManifest,
    save_depth,
    save_manifest,
    save_rgb,
)

__all__ = ["SceneConfig", "Camera", "camera_at", "render_view", "render_arrays",
           "split_tags", "generate_dataset"]

# Per-shape flat albedo; both instances of a shape share it.
ALBEDO = {
    "torus": (0.82, 0.29, 0.24),
    "cube": (0.25, 0.52, 0.83),
    "cone": (0.30, 0.72, 0.36),
    "sphere": (0.85, 0.68, 0.26),
}

_AMBIENT = 0.15
# Light direction in camera coordinates (right, up, forward), unit length.
_LIGHT_CAM = np.array([0.30, -0.50, 0.85])
_LIGHT_CAM = _LIGHT_CAM / np.linalg.norm(_LIGHT_CAM)

_TORUS_SAMPLES = 96
_TORUS_BISECT_ITERS = 40  # interval <= 2*object_radius, so well below 1e-9 m


@dataclass(frozen=True)
class SceneConfig:
    """Scene and camera geometry; defaults reproduce the published setup."""

    shape: str = "sphere"
    camera_radius: float = 0.20
    object_separation: float = 0.083
    near: float = 0.11
    far: float = 0.287
    margin: float = 0.02
    object_radius: float = 0.03
    view_count: int = 1024
    width: int = 640
    height: int = 360
    seed: int = 0
    vertical_fov: float = 45.0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}, got {self.shape!r}")
        if not 0 < self.near < self.far:
            raise ValueError("need 0 < near < far")
        if not self.camera_radius > self.object_separation / 2 + self.object_radius:
            raise ValueError("camera_radius must exceed object_separation/2 + object_radius")
        if self.view_count < 1:
            raise ValueError("view_count must be >= 1")
        if self.width < 1 or self.height < 1:
            raise ValueError("width and height must be >= 1")
        if not 0 < self.vertical_fov < 180:
            raise ValueError("vertical_fov must be in (0, 180) degrees")
        if self.object_radius <= 0:
            raise ValueError("object_radius must be > 0")


@dataclass(frozen=True)
class Camera:
    position: np.ndarray
    look_at: np.ndarray
    up: np.ndarray
    vertical_fov: float

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=np.float64)
        tgt = np.asarray(self.look_at, dtype=np.float64)
        up = np.asarray(self.up, dtype=np.float64)
        if np.allclose(pos, tgt):
            raise ValueError("camera position must differ from look_at")
        fwd = tgt - pos
        if np.linalg.norm(np.cross(fwd, up)) == 0:
            raise ValueError("up vector parallel to view direction")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "look_at", tgt)
        object.__setattr__(self, "up", up / np.linalg.norm(up))

    def basis(self):
        """Orthonormal (right, up, forward) triple."""
        fwd = self.look_at - self.position
        fwd = fwd / np.linalg.norm(fwd)
        right = np.cross(fwd, self.up)
        right = right / np.linalg.norm(right)
        up = np.cross(right, fwd)
        return right, up, fwd


def camera_at(config: SceneConfig, index: int) -> Camera:
    """Camera pose for a view index: azimuth = index * 360 / view_count about y."""
    if not 0 <= index < config.view_count:
        raise IndexError(f"view index {index} out of range [0, {config.view_count})")
    theta = np.deg2rad(index * (360.0 / config.view_count))
    r = config.camera_radius
    pos = np.array([r * np.sin(theta), 0.0, r * np.cos(theta)])
    return Camera(position=pos, look_at=np.zeros(3), up=np.array([0.0, 1.0, 0.0]),
                  vertical_fov=config.vertical_fov)


# ---------------------------------------------------------------------------
# Ray-primitive intersections (vectorized over rays)
# ---------------------------------------------------------------------------
# Each returns (t, normal): t = np.inf where the ray misses; normals are unit
# outward vectors at the hit point.


def _intersect_sphere(origin, dirs, center, radius):
    oc = origin - center
    b = dirs @ oc
    c = oc @ oc - radius * radius
    disc = b * b - c
    ok = disc >= 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    t = -b - sq
    t = np.where(ok & (t > 1e-9), t, np.inf)
    p = origin + t[:, None] * dirs
    n = (p - center) / radius
    return t, n


def _intersect_cube(origin, dirs, center, radius):
    # Axis-aligned, inscribed in the bounding sphere: half-side = radius/sqrt(3).
    h = radius / np.sqrt(3.0)
    lo, hi = center - h, center + h
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / dirs
        t1 = (lo - origin) * inv
        t2 = (hi - origin) * inv
    tmin = np.minimum(t1, t2)
    tmax = np.maximum(t1, t2)
    t_near = tmin.max(axis=1)
    t_far = tmax.min(axis=1)
    # NaN from parallel-and-on-plane rays fails these comparisons -> miss.
    ok = (t_near <= t_far) & (t_far > 0) & (t_near > 1e-9)
    t = np.where(ok, t_near, np.inf)
    # Face normal: the axis attaining t_near, signed by approach side.
    axis = np.argmax(tmin, axis=1)
    n = np.zeros_like(dirs)
    rows = np.arange(len(dirs))
    n[rows, axis] = -np.sign(dirs[rows, axis])
    return t, n


def _intersect_cone(origin, dirs, center, radius):
    # Downward-opening cone: apex at center + (0, 0.6r, 0), base disk of
    # radius 0.8r at y = center_y - 0.6r; bounding radius is exactly `radius`.
    half_h = 0.6 * radius
    base_r = 0.8 * radius
    apex = center + np.array([0.0, half_h, 0.0])
    axis = np.array([0.0, -1.0, 0.0])
    tan2 = (base_r / (2 * half_h)) ** 2
    cos2 = 1.0 / (1.0 + tan2)

    o = origin - apex
    dv = dirs @ axis
    ov = o @ axis
    a = dv * dv - cos2
    b = dv * ov - cos2 * (dirs @ o)
    c = ov * ov - cos2 * (o @ o)
    disc = b * b - a * c
    ok = disc >= 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = np.where(ok, (-b - sq) / a, np.inf)
        tb = np.where(ok, (-b + sq) / a, np.inf)
    t_side = np.full(len(dirs), np.inf)
    for cand in (ta, tb):
        v = ov + cand * dv  # height below apex along the axis
        valid = ok & (cand > 1e-9) & (v >= 0) & (v <= 2 * half_h)
        t_side = np.where(valid & (cand < t_side), cand, t_side)

    # Base cap.
    denom = dirs[:, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        t_cap = (center[1] - half_h - origin[1]) / denom
    p = origin + t_cap[:, None] * dirs
    rho2 = (p[:, 0] - center[0]) ** 2 + (p[:, 2] - center[2]) ** 2
    cap_ok = (np.abs(denom) > 0) & (t_cap > 1e-9) & (rho2 <= base_r * base_r)
    t_cap = np.where(cap_ok, t_cap, np.inf)

    t = np.minimum(t_side, t_cap)
    n = np.zeros_like(dirs)
    hit_side = np.isfinite(t_side) & (t_side <= t_cap)
    if np.any(hit_side):
        ph = origin + t_side[hit_side, None] * dirs[hit_side]
        v = ph - apex
        va = v @ axis
        radial = v - va[:, None] * axis
        ns = radial - (va * tan2)[:, None] * axis
        ns /= np.linalg.norm(ns, axis=1, keepdims=True)
        n[hit_side] = ns
    hit_cap = np.isfinite(t_cap) & (t_cap < t_side)
    n[hit_cap] = [0.0, -1.0, 0.0]
    return t, n


def _torus_implicit(p, center, r_major, r_tube):
    q = p - center
    s = np.sum(q * q, axis=-1) + r_major * r_major - r_tube * r_tube
    return s * s - 4 * r_major * r_major * (q[..., 0] ** 2 + q[..., 2] ** 2)


def _intersect_torus(origin, dirs, center, radius):
    # y-axis torus: major radius 0.7r, tube radius 0.3r (bounding radius r).
    r_major = 0.7 * radius
    r_tube = 0.3 * radius

    # Bounding-sphere interval; rays that miss it are done.
    oc = origin - center
    b = dirs @ oc
    c = oc @ oc - radius * radius
    disc = b * b - c
    hit_bs = disc > 0
    t = np.full(len(dirs), np.inf)
    n = np.zeros_like(dirs)
    if not np.any(hit_bs):
        return t, n

    idx = np.nonzero(hit_bs)[0]
    d_s = dirs[idx]
    sq = np.sqrt(disc[idx])
    t0 = np.maximum(-b[idx] - sq, 1e-9)
    t1 = -b[idx] + sq

    # Sample the interval and take the first sign change of the implicit
    # function (positive outside), then refine by bisection.
    steps = np.linspace(0.0, 1.0, _TORUS_SAMPLES)
    ts = t0[:, None] + (t1 - t0)[:, None] * steps[None, :]
    pts = origin[None, None, :] + ts[..., None] * d_s[:, None, :]
    vals = _torus_implicit(pts, center, r_major, r_tube)
    neg = vals <= 0
    first = np.argmax(neg, axis=1)
    found = neg.any(axis=1) & (first > 0)
    if np.any(found):
        rows = np.nonzero(found)[0]
        k = first[rows]
        lo = ts[rows, k - 1]
        hi = ts[rows, k]
        dr = d_s[rows]
        for _ in range(_TORUS_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            fm = _torus_implicit(origin[None, :] + mid[:, None] * dr, center, r_major, r_tube)
            above = fm > 0
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        t_hit = 0.5 * (lo + hi)
        p = origin[None, :] + t_hit[:, None] * dr
        q = p - center
        s = np.sum(q * q, axis=1)
        grad = np.empty_like(q)
        grad[:, 0] = q[:, 0] * (s - r_major**2 - r_tube**2)
        grad[:, 1] = q[:, 1] * (s + r_major**2 - r_tube**2)
        grad[:, 2] = q[:, 2] * (s - r_major**2 - r_tube**2)
        norms = np.linalg.norm(grad, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        t[idx[rows]] = t_hit
        n[idx[rows]] = grad / norms
    return t, n


_INTERSECT = {
    "sphere": _intersect_sphere,
    "cube": _intersect_cube,
    "cone": _intersect_cone,
    "torus": _intersect_torus,
}


# ---------------------------------------------------------------------------
# View rendering
# ---------------------------------------------------------------------------


def render_arrays(config: SceneConfig, index: int) -> dict:
    """Render one view to float buffers.

    Returns rgb (h, w, 3 float in [0, 1]), z_cam (h, w, optical-axis
    distance, inf where no hit), hit mask, and object_id (-1 none,
    0 = +z instance, 1 = -z instance). Used by render_view and by tests
    that need unquantized depth.
    """
    cam = camera_at(config, index)
    right, up, fwd = cam.basis()
    w, h = config.width, config.height
    tan_v = np.tan(np.deg2rad(config.vertical_fov) / 2)
    aspect = w / h
    xs = ((np.arange(w) + 0.5) / w * 2 - 1) * tan_v * aspect
    ys = (1 - (np.arange(h) + 0.5) / h * 2) * tan_v
    d = (fwd[None, None, :]
         + xs[None, :, None] * right[None, None, :]
         + ys[:, None, None] * up[None, None, :])
    d = d / np.linalg.norm(d, axis=-1, keepdims=True)
    dirs = d.reshape(-1, 3)

    sep = config.object_separation / 2
    centers = [np.array([0.0, 0.0, +sep]), np.array([0.0, 0.0, -sep])]
    intersect = _INTERSECT[config.shape]

    t_best = np.full(len(dirs), np.inf)
    n_best = np.zeros_like(dirs)
    obj_id = np.full(len(dirs), -1, dtype=np.int64)
    for k, center in enumerate(centers):
        t, n = intersect(cam.position, dirs, center, config.object_radius)
        closer = t < t_best
        t_best = np.where(closer, t, t_best)
        n_best = np.where(closer[:, None], n, n_best)
        obj_id = np.where(closer, k, obj_id)

    hit = np.isfinite(t_best)
    z_cam = np.where(hit, t_best * (dirs @ fwd), np.inf)

    light = _LIGHT_CAM[0] * right + _LIGHT_CAM[1] * up + _LIGHT_CAM[2] * fwd
    lambert = np.clip(-(n_best @ light), 0.0, None)
    shade = np.where(hit, _AMBIENT + (1 - _AMBIENT) * lambert, 0.0)
    albedo = np.array(ALBEDO[config.shape])
    rgb = shade[:, None] * albedo[None, :]
    rgb[~hit] = 0.0

    return {
        "rgb": rgb.reshape(h, w, 3),
        "z_cam": z_cam.reshape(h, w),
        "hit": hit.reshape(h, w),
        "object_id": obj_id.reshape(h, w),
    }


def render_view(config: SceneConfig, index: int):
    """Render one view to an (RgbImage, DepthMap) pair."""
    buf = render_arrays(config, index)
    rgb8 = np.rint(np.clip(buf["rgb"], 0.0, 1.0) * 255).astype(np.uint8)
    gray = 255.0 * (config.far - buf["z_cam"]) / (config.far - config.near)
    gray8 = np.where(buf["hit"], np.clip(np.rint(gray), 0, 255), 0).astype(np.uint8)
    return RgbImage(rgb8), DepthMap(gray8)


# ---------------------------------------------------------------------------
# Dataset generation
# ---------------------------------------------------------------------------


def split_tags(view_count: int) -> list:
    """Deterministic interleaved split with exactly floor(0.6 n) train views.

    Index i starts as train iff i mod 5 < 3; the trailing train indices are
    then demoted to test until the train count matches the target (614/410
    at 1024 views).
    """
    tags = [(i % 5) < 3 for i in range(view_count)]
    target = int(0.6 * view_count)
    i = view_count - 1
    while sum(tags) > target and i >= 0:
        if tags[i]:
            tags[i] = False
        i -= 1
    return ["train" if t else "test" for t in tags]


def _render_and_save(config: SceneConfig, index: int, rgb_path: str, depth_path: str):
    rgb, depth = render_view(config, index)
    save_rgb(rgb, rgb_path)
    save_depth(depth, depth_path)


def generate_dataset(config: SceneConfig, out_dir, jobs: int = 1) -> ViewManifest:
    """Render all views, write PNG pairs and manifest.json under out_dir.

    Outputs are deterministic for a given config and independent of jobs;
    views are pure functions of (config, index).
    """
    out = Path(out_dir)
    (out / "rgb").mkdir(parents=True, exist_ok=True)
    (out / "depth").mkdir(parents=True, exist_ok=True)

    tags = split_tags(config.view_count)
    step = 360.0 / config.view_count
    entries = []
    work = []
    for i in range(config.view_count):
        rgb_rel = f"rgb/view_{i:04d}.png"
        depth_rel = f"depth/view_{i:04d}.png"
        entries.append(ManifestEntry(index=i, azimuth_degrees=i * step,
                                     rgb_path=rgb_rel, depth_path=depth_rel,
                                     split_tag=tags[i]))
        work.append((config, i, str(out / rgb_rel), str(out / depth_rel)))

    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_render_and_save, *args) for args in work]
            for f in futures:
                f.result()
    else:
        for args in work:
            _render_and_save(*args)

    manifest = ViewManifest(object_name=config.shape, view_count=config.view_count,
                            entries=tuple(entries), scene=asdict(config))
    save_manifest(manifest, out / "manifest.json")
    return manifest
