"""holopipe: 360-degree RGB-D rendering, layer-based FFT hologram synthesis,
Lee amplitude encoding, numerical reconstruction, and depth-map metrics."""

__version__ = "0.1.0"

from .imagecore import (  # noqa: F401
    ComplexField,
    DataMismatchError,
    DepthMap,
    RgbImage,
    ViewManifest,
    depth_gray_to_distance,
    distance_to_depth_gray,
    load_depth,
    load_field,
    load_manifest,
    load_rgb,
    save_depth,
    save_field,
    save_manifest,
    save_rgb,
)
from .scenegen import Camera, SceneConfig, camera_at, generate_dataset, render_view  # noqa: F401
from .metrics import (  # noqa: F401
    MetricReport,
    acc_cgh,
    acc_depth,
    error_stats,
    evaluate_depth_pair,
    mse,
    psnr,
    psnr_from_mse,
    ssim,
)
from .cgh import Hologram, SynthesisConfig, load_hologram, propagate, save_hologram, synthesize  # noqa: F401
from .leecode import LeeCgh, SlmSpec, embed_to_slm, lee_decode, lee_encode  # noqa: F401
from .recon import Region, plane_sweep, reconstruct, tenengrad  # noqa: F401
