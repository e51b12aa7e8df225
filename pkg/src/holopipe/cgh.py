"""Layer-based FFT hologram synthesis.

A depth map is quantized into equal-width gray bins; each bin's pixels
form an amplitude layer (channel value / 255) with either zero or
seeded-random phase, each layer is back-propagated from its metric
distance to the hologram plane with a frequency-domain transfer
function, and the layers sum into one complex field per color channel.

The default kernel is the band-limited angular spectrum (exact scalar
propagation, evanescent components zeroed); a Fresnel transfer function
is available for comparison. At the pitches used here every grid
frequency propagates, so the transfer function is unitary and layer
energy is conserved.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .imagecore import ComplexField, DataMismatchError, DepthMap, RgbImage, \
    depth_gray_to_distance, load_field, save_field

__all__ = ["SynthesisConfig", "Hologram", "propagate", "synthesize",
           "layer_bins", "save_hologram", "load_hologram", "CHANNEL_SUFFIXES"]

DEFAULT_WAVELENGTHS = (638e-9, 520e-9, 450e-9)
# SLM pitch is 3.6 um at 3840 wide; synthesis runs at image width 640, so a
# 6x coarser pitch spans the same physical aperture.
DEFAULT_PITCH = 3.6e-6 * 6

PHASE_MODES = ("seeded_random", "constant_zero")
KERNELS = ("angular_spectrum", "fresnel")
CHANNEL_SUFFIXES = ("r", "g", "b")


@dataclass(frozen=True)
class SynthesisConfig:
    wavelengths: tuple = DEFAULT_WAVELENGTHS
    hologram_pitch: float = DEFAULT_PITCH
    layer_count: int = 64
    hologram_plane_offset: float = 0.0
    phase_mode: str = "seeded_random"
    seed: int = 0
    kernel: str = "angular_spectrum"

    def __post_init__(self):
        if len(self.wavelengths) != 3 or any(w <= 0 for w in self.wavelengths):
            raise ValueError("need three positive wavelengths")
        if not 1 <= self.layer_count <= 256:
            raise ValueError("layer_count must be in [1, 256]")
        if self.hologram_pitch <= 0:
            raise ValueError("hologram_pitch must be > 0")
        if self.phase_mode not in PHASE_MODES:
            raise ValueError(f"phase_mode must be one of {PHASE_MODES}")
        if self.kernel not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class Hologram:
    """One ComplexField per color channel, sharing grid and pitch."""

    channels: tuple  # (red, green, blue) ComplexField

    def __post_init__(self):
        if len(self.channels) != 3:
            raise ValueError("hologram needs exactly three channels")
        r = self.channels[0]
        for ch in self.channels[1:]:
            if (ch.width, ch.height, ch.pitch) != (r.width, r.height, r.pitch):
                raise DataMismatchError("hologram channels must share size and pitch")

    @property
    def width(self) -> int:
        return self.channels[0].width

    @property
    def height(self) -> int:
        return self.channels[0].height

    @property
    def pitch(self) -> float:
        return self.channels[0].pitch


def _transfer(shape, pitch, wavelength, distance, kernel):
    fy = np.fft.fftfreq(shape[0], d=pitch)
    fx = np.fft.fftfreq(shape[1], d=pitch)
    fx2 = fx[None, :] ** 2
    fy2 = fy[:, None] ** 2
    if kernel == "angular_spectrum":
        arg = 1.0 / wavelength**2 - fx2 - fy2
        mask = arg >= 0
        kz = np.sqrt(np.where(mask, arg, 0.0))
        return np.exp(2j * np.pi * distance * kz) * mask
    if kernel == "fresnel":
        return np.exp(2j * np.pi * distance / wavelength) * np.exp(
            -1j * np.pi * wavelength * distance * (fx2 + fy2)
        )
    raise ValueError(f"kernel must be one of {KERNELS}")


def propagate(field: ComplexField, distance: float, kernel: str = "angular_spectrum") -> ComplexField:
    """Free-space propagation by a signed distance in meters.

    Angular spectrum multiplies the spectrum by exp(i 2 pi z sqrt(1/lambda^2
    - fx^2 - fy^2)) where the root is real and by zero where evanescent; a
    negative distance applies the conjugate kernel, and distance 0 is the
    identity up to one FFT round trip.
    """
    h = _transfer(field.data.shape, field.pitch, field.wavelength, distance, kernel)
    out = np.fft.ifft2(np.fft.fft2(field.data) * h)
    return ComplexField(out, pitch=field.pitch, wavelength=field.wavelength)


def layer_bins(layer_count: int):
    """Bin index per gray level and real-valued center gray per bin.

    Bins are equal-width over the 256 gray levels; at layer_count 256 each
    gray level is its own layer and the center equals the gray itself.
    """
    grays = np.arange(256)
    idx = (grays * layer_count) // 256
    centers = (np.arange(layer_count) + 0.5) * 256.0 / layer_count - 0.5
    return idx, centers


def _layer_phase(config: SynthesisConfig, channel: int, layer: int, shape):
    if config.phase_mode == "constant_zero":
        return None
    rng = np.random.default_rng([config.seed, channel, layer])
    return rng.uniform(0.0, 2.0 * np.pi, shape)


def synthesize(rgb: RgbImage, depth: DepthMap, config: SynthesisConfig, geometry) -> Hologram:
    """Synthesize a three-channel hologram from an RGB view and its depth map.

    Layers are summed in ascending (channel, layer) order so output bytes
    are reproducible. Random phase planes are drawn per (seed, channel,
    layer), so a layer's phase does not depend on which pixels occupy it.
    """
    if (rgb.width, rgb.height) != (depth.width, depth.height):
        raise DataMismatchError(
            f"rgb {rgb.width}x{rgb.height} vs depth {depth.width}x{depth.height}")
    idx_of_gray, centers = layer_bins(config.layer_count)
    layer_idx = idx_of_gray[depth.data]
    distances = depth_gray_to_distance(centers, geometry) - config.hologram_plane_offset

    fields = []
    for channel in range(3):
        amplitude = rgb.data[:, :, channel].astype(np.float64) / 255.0
        acc = np.zeros(depth.data.shape, dtype=np.complex128)
        wavelength = config.wavelengths[channel]
        for layer in range(config.layer_count):
            sel = (layer_idx == layer) & (amplitude > 0)
            if not np.any(sel):
                continue
            layer_amp = np.where(sel, amplitude, 0.0)
            phase = _layer_phase(config, channel, layer, layer_amp.shape)
            if phase is None:
                layer_field = layer_amp.astype(np.complex128)
            else:
                layer_field = layer_amp * np.exp(1j * phase)
            src = ComplexField(layer_field, pitch=config.hologram_pitch,
                               wavelength=wavelength)
            acc += propagate(src, -float(distances[layer]), kernel=config.kernel).data
        fields.append(ComplexField(acc, pitch=config.hologram_pitch,
                                   wavelength=wavelength))
    return Hologram(channels=tuple(fields))


def save_hologram(holo: Hologram, prefix) -> list:
    """Write one CFLD file per channel: <prefix>_r.cfld, _g.cfld, _b.cfld."""
    prefix = Path(prefix)
    paths = []
    for suffix, ch in zip(CHANNEL_SUFFIXES, holo.channels):
        p = prefix.parent / f"{prefix.name}_{suffix}.cfld"
        save_field(ch, p)
        paths.append(p)
    return paths


def load_hologram(prefix) -> Hologram:
    prefix = Path(prefix)
    chans = tuple(
        load_field(prefix.parent / f"{prefix.name}_{s}.cfld") for s in CHANNEL_SUFFIXES
    )
    return Hologram(channels=chans)
