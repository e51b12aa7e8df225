"""Lee four-coefficient decomposition and SLM raster embedding.

A complex sample A e^{i theta} splits into nonnegative coefficients at
phase offsets 0, pi/2, pi, 3pi/2: the two planes bracketing theta carry
A cos(phi) and A sin(phi) with phi = theta - q pi/2, the other two are
exactly zero, and the sum reconstructs the sample exactly. Quantization
maps the per-hologram maximum coefficient to level 255; the embedder
expands each hologram pixel into a horizontal run of four SLM cells,
centered on the panel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imagecore import ComplexField, DataMismatchError

__all__ = ["LeeCgh", "SlmSpec", "lee_encode", "lee_decode", "embed_to_slm"]

_HALF_PI = np.pi / 2


@dataclass(frozen=True)
class SlmSpec:
    """Amplitude-panel geometry; defaults are the 4K LCoS used for display."""

    width: int = 3840
    height: int = 2160
    pitch: float = 3.6e-6
    bit_depth: int = 8

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("invalid SLM dimensions")
        if self.pitch <= 0:
            raise ValueError("pitch must be > 0")
        if self.bit_depth != 8:
            raise ValueError("only 8-bit panels are supported")


@dataclass(frozen=True)
class LeeCgh:
    """Four coefficient planes (0, pi/2, pi, 3pi/2) plus their 8-bit form.

    coeffs and quantized have shape (4, height, width); scale is the
    coefficient value mapped to level 255. pitch and wavelength are carried
    from the source field so decoding returns a full ComplexField.
    """

    coeffs: np.ndarray
    quantized: np.ndarray
    scale: float
    pitch: float
    wavelength: float

    def __post_init__(self):
        c, q = self.coeffs, self.quantized
        if c.ndim != 3 or c.shape[0] != 4 or c.shape != q.shape:
            raise ValueError("need matching (4, h, w) coefficient planes")
        if q.dtype != np.uint8:
            raise ValueError("quantized planes must be uint8")
        if np.any(c < 0):
            raise ValueError("coefficients must be nonnegative")
        if np.any(np.count_nonzero(c, axis=0) > 2):
            raise ValueError("more than two nonzero coefficients at a pixel")
        if self.scale <= 0:
            raise ValueError("scale must be > 0")
        if not np.array_equal(q, np.rint(c * (255.0 / self.scale)).astype(np.uint8)):
            raise ValueError("quantized planes must equal round(coeff * 255 / scale)")
        c = np.ascontiguousarray(c)
        q = np.ascontiguousarray(q)
        c.flags.writeable = False
        q.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "quantized", q)

    @property
    def width(self) -> int:
        return self.coeffs.shape[2]

    @property
    def height(self) -> int:
        return self.coeffs.shape[1]


def lee_encode(field: ComplexField) -> LeeCgh:
    """Decompose a complex field into the four nonnegative Lee planes.

    At exact quadrant boundaries the lower quadrant index wins (the cosine
    coefficient carries the full amplitude).
    """
    amp = np.abs(field.data)
    theta = np.angle(field.data)
    theta = np.where(theta < 0, theta + 2 * np.pi, theta)
    q = np.minimum(np.floor(theta / _HALF_PI).astype(np.int64), 3)
    phi = np.maximum(theta - q * _HALF_PI, 0.0)
    c_cos = np.maximum(amp * np.cos(phi), 0.0)
    c_sin = np.maximum(amp * np.sin(phi), 0.0)

    coeffs = np.zeros((4,) + field.data.shape, dtype=np.float64)
    for quadrant in range(4):
        m = q == quadrant
        coeffs[quadrant][m] = c_cos[m]
        coeffs[(quadrant + 1) % 4][m] = c_sin[m]

    scale = float(coeffs.max())
    if scale == 0.0:
        scale = 1.0
    quantized = np.rint(coeffs * (255.0 / scale)).astype(np.uint8)
    return LeeCgh(coeffs=coeffs, quantized=quantized, scale=scale,
                  pitch=field.pitch, wavelength=field.wavelength)


def lee_decode(cgh: LeeCgh, quantized: bool = False) -> ComplexField:
    """Sum the four planes back into a complex field.

    With quantized=False this inverts lee_encode exactly; with
    quantized=True the 8-bit planes are rescaled by scale/255 first, so
    per-pixel error is bounded by sqrt(2) * scale / 510 plus rounding.
    """
    if quantized:
        planes = cgh.quantized.astype(np.float64) * (cgh.scale / 255.0)
    else:
        planes = cgh.coeffs
    data = (planes[0] - planes[2]) + 1j * (planes[1] - planes[3])
    return ComplexField(data, pitch=cgh.pitch, wavelength=cgh.wavelength)


def embed_to_slm(cgh: LeeCgh, slm: SlmSpec = SlmSpec()) -> np.ndarray:
    """Expand each hologram pixel to four horizontal SLM cells (L1..L4).

    Returns one 8-bit raster of the full panel with the active region
    centered and the rest zero.
    """
    active_w = 4 * cgh.width
    if active_w > slm.width or cgh.height > slm.height:
        raise DataMismatchError(
            f"hologram {cgh.width}x{cgh.height} needs {active_w}x{cgh.height} cells; "
            f"panel is {slm.width}x{slm.height}")
    active = np.zeros((cgh.height, active_w), dtype=np.uint8)
    for k in range(4):
        active[:, k::4] = cgh.quantized[k]
    raster = np.zeros((slm.height, slm.width), dtype=np.uint8)
    x0 = (slm.width - active_w) // 2
    y0 = (slm.height - cgh.height) // 2
    raster[y0:y0 + cgh.height, x0:x0 + active_w] = active
    return raster
