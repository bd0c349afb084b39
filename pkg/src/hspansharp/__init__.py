"""Hyperspectral pansharpening toolkit: fusion methods, a Wald-protocol
evaluation harness, and supporting raster utilities."""

from .imgcore import (
    DynamicRange,
    SpectralImage,
    as_matrix,
    band_stats,
    clip_to_range,
    from_matrix,
)
from .sensorsim import (
    NOISE_ALGORITHM,
    BlurKernel,
    SensorModel,
    add_gaussian_noise,
    blur_downsample,
    default_pan_response,
    default_phase,
    drop_bands,
    kernel_from_mtf,
    synth_pan,
)
from .resample import upsample
from .metrics import (
    QualityReport,
    cc,
    compute_report,
    ergas,
    rmse,
    rmse_map,
    rmse_per_band,
    sam,
)

__version__ = "0.1.0"

__all__ = [
    "DynamicRange",
    "SpectralImage",
    "as_matrix",
    "band_stats",
    "clip_to_range",
    "from_matrix",
    "NOISE_ALGORITHM",
    "BlurKernel",
    "SensorModel",
    "add_gaussian_noise",
    "blur_downsample",
    "default_pan_response",
    "default_phase",
    "drop_bands",
    "kernel_from_mtf",
    "synth_pan",
    "upsample",
    "QualityReport",
    "cc",
    "compute_report",
    "ergas",
    "rmse",
    "rmse_map",
    "rmse_per_band",
    "sam",
    "__version__",
]
