import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holopipe.imagecore import ComplexField, DataMismatchError
from holopipe.leecode import LeeCgh, SlmSpec, embed_to_slm, lee_decode, lee_encode

RNG = np.random.default_rng(31337)


def field_from(data):
    return ComplexField(np.asarray(data, dtype=np.complex128),
                        pitch=2.16e-5, wavelength=520e-9)


def random_field(n=64, seed=None):
    rng = RNG if seed is None else np.random.default_rng(seed)
    return field_from(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))


def rms(a):
    return float(np.sqrt(np.mean(np.abs(a) ** 2)))


# ---------------------------------------------------------------------------
# Coefficient placement
# ---------------------------------------------------------------------------


def test_positive_real_axis():
    cgh = lee_encode(field_from([[1.0 + 0j]]))
    np.testing.assert_allclose(cgh.coeffs[:, 0, 0], [1.0, 0.0, 0.0, 0.0], atol=1e-15)


def test_45_degrees():
    cgh = lee_encode(field_from([[np.exp(1j * np.pi / 4)]]))
    s = np.sqrt(2) / 2
    np.testing.assert_allclose(cgh.coeffs[:, 0, 0], [s, s, 0.0, 0.0], atol=1e-12)


def test_negative_imaginary_axis():
    cgh = lee_encode(field_from([[-2j]]))
    np.testing.assert_allclose(cgh.coeffs[:, 0, 0], [0.0, 0.0, 0.0, 2.0], atol=1e-15)


def test_quadrant_boundary_single_coefficient():
    for q, val in enumerate([3.0 + 0j, 3.0j, -3.0 + 0j, -3.0j]):
        cgh = lee_encode(field_from([[val]]))
        expected = np.zeros(4)
        expected[q] = 3.0
        np.testing.assert_allclose(cgh.coeffs[:, 0, 0], expected, atol=1e-15)


def test_boundary_continuity():
    eps = 1e-12
    for q in range(4):
        theta = q * np.pi / 2
        at = lee_encode(field_from([[np.exp(1j * theta)]])).coeffs[:, 0, 0]
        above = lee_encode(field_from([[np.exp(1j * (theta + eps))]])).coeffs[:, 0, 0]
        below = lee_encode(field_from([[np.exp(1j * (theta - eps))]])).coeffs[:, 0, 0]
        assert np.max(np.abs(above - at)) <= 1e-11
        assert np.max(np.abs(below - at)) <= 1e-11


# ---------------------------------------------------------------------------
# Round trips
# ---------------------------------------------------------------------------


def test_unquantized_roundtrip_identity():
    fld = random_field(64)
    back = lee_decode(lee_encode(fld))
    assert rms(back.data - fld.data) <= 1e-12 * rms(fld.data)


def test_zero_field_roundtrip():
    fld = field_from(np.zeros((8, 8)))
    cgh = lee_encode(fld)
    assert np.all(cgh.coeffs == 0) and np.all(cgh.quantized == 0)
    assert np.all(lee_decode(cgh).data == 0)
    assert np.all(lee_decode(cgh, quantized=True).data == 0)


def test_quantized_roundtrip_error_bound():
    fld = random_field(64, seed=11)
    cgh = lee_encode(fld)
    back = lee_decode(cgh, quantized=True)
    err = np.abs(back.data - fld.data)
    per_pixel_bound = np.sqrt(2) * cgh.scale / 255 / 2 + 1e-12
    assert err.max() <= per_pixel_bound
    assert rms(back.data - fld.data) <= cgh.scale / 255


def test_doubling_bit_depth_halves_error():
    fld = random_field(64, seed=12)
    cgh = lee_encode(fld)

    def roundtrip_rms(levels):
        q = np.rint(cgh.coeffs * (levels / cgh.scale))
        planes = q * (cgh.scale / levels)
        back = (planes[0] - planes[2]) + 1j * (planes[1] - planes[3])
        return rms(back - fld.data)

    assert roundtrip_rms(65535) <= roundtrip_rms(255) / 2


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_encode_properties_hold(seed):
    rng = np.random.default_rng(seed)
    data = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
    cgh = lee_encode(field_from(data))
    assert np.all(cgh.coeffs >= 0)
    assert np.all(np.count_nonzero(cgh.coeffs, axis=0) <= 2)
    back = lee_decode(cgh)
    assert rms(back.data - data) <= 1e-12 * max(rms(data), 1e-300)


def test_bulk_nonnegativity_and_zero_count():
    # 10^6 random complex samples in one array.
    rng = np.random.default_rng(99)
    data = rng.normal(size=(1000, 1000)) + 1j * rng.normal(size=(1000, 1000))
    cgh = lee_encode(field_from(data))
    assert np.all(cgh.coeffs >= 0)
    assert np.all(np.count_nonzero(cgh.coeffs, axis=0) <= 2)


# ---------------------------------------------------------------------------
# Quantization bookkeeping
# ---------------------------------------------------------------------------


def test_scale_maps_max_coefficient_to_255():
    fld = random_field(32, seed=13)
    cgh = lee_encode(fld)
    assert cgh.scale == pytest.approx(float(cgh.coeffs.max()))
    assert cgh.quantized.max() == 255


def test_invariant_validation_rejects_negative_and_crowded():
    ok = lee_encode(random_field(4, seed=1))
    bad = ok.coeffs.copy()
    bad[0, 0, 0] = -1.0
    with pytest.raises(ValueError, match="nonnegative"):
        LeeCgh(coeffs=bad, quantized=ok.quantized.copy(), scale=ok.scale,
               pitch=ok.pitch, wavelength=ok.wavelength)
    crowded = ok.coeffs.copy()
    crowded[:, 0, 0] = 1.0
    with pytest.raises(ValueError, match="two nonzero"):
        LeeCgh(coeffs=crowded, quantized=ok.quantized.copy(), scale=ok.scale,
               pitch=ok.pitch, wavelength=ok.wavelength)


# ---------------------------------------------------------------------------
# SLM embedding
# ---------------------------------------------------------------------------


def test_embed_geometry_640x360():
    fld = field_from(np.ones((360, 640)))
    raster = embed_to_slm(lee_encode(fld), SlmSpec())
    assert raster.shape == (2160, 3840)
    cols = np.nonzero(raster.any(axis=0))[0]
    rows = np.nonzero(raster.any(axis=1))[0]
    assert cols.min() == 640 and cols.max() == 640 + 2560 - 4  # L1 planes light up
    assert rows.min() == 900 and rows.max() == 900 + 360 - 1


def test_embed_subcell_order():
    fld = field_from([[np.exp(1j * np.pi / 4)]])
    cgh = lee_encode(fld)
    raster = embed_to_slm(cgh, SlmSpec(width=4, height=1))
    assert raster.shape == (1, 4)
    np.testing.assert_array_equal(raster[0], cgh.quantized[:, 0, 0])


def test_embed_bound_check():
    ok = lee_encode(field_from(np.ones((2160, 960))))
    embed_to_slm(ok, SlmSpec())  # 4*960 = 3840 exactly fits
    too_wide = lee_encode(field_from(np.ones((1, 961))))
    with pytest.raises(DataMismatchError):
        embed_to_slm(too_wide, SlmSpec())
    too_tall = lee_encode(field_from(np.ones((2161, 8))))
    with pytest.raises(DataMismatchError):
        embed_to_slm(too_tall, SlmSpec())


def test_embed_zero_hologram_zero_raster():
    raster = embed_to_slm(lee_encode(field_from(np.zeros((6, 6)))), SlmSpec())
    assert not raster.any()
