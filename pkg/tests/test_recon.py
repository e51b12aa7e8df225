import csv

import numpy as np
import pytest

from holopipe.cgh import Hologram, SynthesisConfig, synthesize
from holopipe.imagecore import ComplexField, DepthMap, RgbImage, depth_gray_to_distance
from holopipe.recon import (
    Region,
    plane_sweep,
    reconstruct,
    save_focus_csv,
    save_recon_previews,
    tenengrad,
)
from holopipe.scenegen import SceneConfig

PITCH = 2.16e-5


def hologram_from(datas):
    wls = (638e-9, 520e-9, 450e-9)
    return Hologram(channels=tuple(
        ComplexField(np.asarray(d, dtype=np.complex128), pitch=PITCH, wavelength=w)
        for d, w in zip(datas, wls)))


def zero_hologram(n=32):
    z = np.zeros((n, n))
    return hologram_from([z, z, z])


def point_scene(n, gray, x, y):
    rgb = np.zeros((n, n, 3), dtype=np.uint8)
    dep = np.zeros((n, n), dtype=np.uint8)
    rgb[y, x] = (255, 255, 255)
    dep[y, x] = gray
    return RgbImage(rgb), DepthMap(dep)


def two_blob_scene(n=96, gray_a=220, gray_b=120):
    # blob A on the left, blob B on the right, well separated in depth
    rgb = np.zeros((n, n, 3), dtype=np.uint8)
    dep = np.zeros((n, n), dtype=np.uint8)
    ya, xa = n // 2, n // 4
    yb, xb = n // 2, 3 * n // 4
    rgb[ya - 2:ya + 3, xa - 2:xa + 3] = 255
    rgb[yb - 2:yb + 3, xb - 2:xb + 3] = 255
    dep[ya - 2:ya + 3, xa - 2:xa + 3] = gray_a
    dep[yb - 2:yb + 3, xb - 2:xb + 3] = gray_b
    region_a = Region(xa - 8, ya - 8, xa + 8, ya + 8)
    region_b = Region(xb - 8, yb - 8, xb + 8, yb + 8)
    return RgbImage(rgb), DepthMap(dep), region_a, region_b


def test_zero_hologram_reconstructs_to_zero():
    plane = reconstruct(zero_hologram(), 0.2)
    assert np.all(plane.intensity == 0)
    assert np.all(plane.preview_rgb() == 0)


def test_intensity_sum_parseval():
    rng = np.random.default_rng(8)
    datas = [rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64)) for _ in range(3)]
    holo = hologram_from(datas)
    plane = reconstruct(holo, 0.15)
    for k in range(3):
        e0 = np.sum(np.abs(holo.channels[k].data) ** 2)
        e1 = np.sum(plane.channel(k))
        assert abs(e1 - e0) / e0 <= 1e-9


def test_reconstruct_distance_domain():
    holo = zero_hologram()
    with pytest.raises(ValueError):
        reconstruct(holo, 0.0)
    with pytest.raises(ValueError):
        reconstruct(holo, 1.5)


def test_point_scene_peaks_at_source_location():
    scene = SceneConfig()
    cfg = SynthesisConfig(phase_mode="constant_zero", layer_count=256)
    rgb, dep = point_scene(64, gray=180, x=20, y=40)
    holo = synthesize(rgb, dep, cfg, scene)
    d = float(depth_gray_to_distance(180, scene))
    plane = reconstruct(holo, d)
    for k in range(3):
        peak = np.unravel_index(plane.channel(k).argmax(), (64, 64))
        assert peak == (40, 20)


def test_constant_intensity_zero_focus():
    assert tenengrad(np.full((16, 16), 3.7)) == 0.0


def test_tenengrad_small_region_rejected():
    with pytest.raises(ValueError):
        tenengrad(np.ones((2, 5)))


def test_region_validation():
    with pytest.raises(ValueError):
        Region(4, 4, 4, 8)
    region = Region(0, 0, 8, 8)
    with pytest.raises(ValueError):
        region.crop(np.ones((4, 4)))


def test_plane_sweep_point_scene_argmax_at_true_depth():
    scene = SceneConfig()
    cfg = SynthesisConfig(phase_mode="seeded_random", seed=21, layer_count=256)
    gray = 150
    rgb, dep = point_scene(64, gray=gray, x=32, y=32)
    holo = synthesize(rgb, dep, cfg, scene)
    d_true = float(depth_gray_to_distance(gray, scene))
    step = 0.004
    distances = [d_true + k * step for k in range(-2, 3)]
    curves = plane_sweep(holo, distances, [Region(24, 24, 40, 40)])
    assert curves[0].best_distance == pytest.approx(d_true, abs=1e-12)


def test_accommodation_two_objects():
    scene = SceneConfig()
    cfg = SynthesisConfig(phase_mode="seeded_random", seed=3, layer_count=64)
    rgb, dep, region_a, region_b = two_blob_scene()
    holo = synthesize(rgb, dep, cfg, scene)
    d_a = float(depth_gray_to_distance(220, scene))
    d_b = float(depth_gray_to_distance(120, scene))
    distances = sorted(np.linspace(min(d_a, d_b) - 0.01, max(d_a, d_b) + 0.01, 9))
    curves = plane_sweep(holo, distances, [region_a, region_b])
    best_a = curves[0].best_distance
    best_b = curves[1].best_distance
    # ordering matches the true depths; A is nearer (higher gray)
    assert d_a < d_b
    assert best_a < best_b
    # at A's plane, region A is sharper than region B
    plane = reconstruct(holo, d_a)
    g = plane.channel(1)
    assert tenengrad(region_a.crop(g)) > tenengrad(region_b.crop(g))


def test_sweep_determinism():
    rng = np.random.default_rng(44)
    datas = [rng.normal(size=(48, 48)) + 1j * rng.normal(size=(48, 48)) for _ in range(3)]
    holo = hologram_from(datas)
    distances = [0.12, 0.16, 0.2]
    regions = [Region(8, 8, 24, 24)]
    c1 = plane_sweep(holo, distances, regions)
    c2 = plane_sweep(holo, distances, regions)
    assert c1[0].scores == c2[0].scores


def test_sweep_needs_two_distances_and_regions():
    holo = zero_hologram()
    with pytest.raises(ValueError):
        plane_sweep(holo, [0.1], [Region(0, 0, 8, 8)])
    with pytest.raises(ValueError):
        plane_sweep(holo, [0.1, 0.2], [])


def test_preview_and_csv_outputs(tmp_path):
    rng = np.random.default_rng(17)
    datas = [rng.normal(size=(32, 32)) + 1j * rng.normal(size=(32, 32)) for _ in range(3)]
    holo = hologram_from(datas)
    plane = reconstruct(holo, 0.13)
    paths = save_recon_previews(plane, tmp_path / "plane0")
    names = sorted(p.name for p in paths)
    assert names == ["plane0_b.png", "plane0_g.png", "plane0_r.png", "plane0_rgb.png"]
    curves = plane_sweep(holo, [0.1, 0.2], [Region(0, 0, 16, 16)])
    save_focus_csv(curves, tmp_path / "focus.csv")
    rows = list(csv.reader((tmp_path / "focus.csv").open()))
    assert rows[0] == ["distance", "region", "score"]
    assert len(rows) == 3
    assert float(rows[1][0]) == 0.1 and rows[1][1] == "0"
