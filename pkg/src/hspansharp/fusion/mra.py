"""Multiresolution-analysis pansharpening: SFIM and the MTF-matched
generalized Laplacian pyramid, with additive or high-pass-modulation
injection.

Each method builds a low-pass PAN P_L, equalizes the PAN to every band
against the P_L statistics, and injects the band detail G_k (P - P_L).
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import convolve1d

from ..imgcore import DynamicRange, SpectralImage
from ..resample import upsample
from ..sensorsim import blur_downsample, kernel_from_mtf

__all__ = [
    "mra_fuse",
    "box_lowpass",
    "glp_lowpass",
    "fuse_sfim",
    "fuse_mtf_glp",
    "fuse_mtf_glp_hpm",
]

# Relative magnitude below which the HPM divisor counts as zero.
_DIV_GUARD = 1e-8


def _hpm_gain(band: np.ndarray, p_low: np.ndarray, rng: DynamicRange) -> np.ndarray:
    guard = np.abs(p_low) < _DIV_GUARD * rng.span
    safe = np.where(guard, 1.0, p_low)
    return np.where(guard, 1.0, band / safe)


def mra_fuse(
    y_up: SpectralImage,
    pan: SpectralImage,
    pan_low: SpectralImage,
    gains: str,
    rng: DynamicRange,
) -> SpectralImage:
    """X^k = Y^k + G_k (P - P_L) with G = 1 (additive) or Y^k / P_L (hpm).

    HPM outputs are clipped to the dynamic range; the division is guarded
    where |P_L| is negligible relative to the range span.
    """
    if gains not in ("additive", "hpm"):
        raise ValueError(f"unknown gain mode: {gains!r}")
    if pan.bands != 1 or pan_low.bands != 1:
        raise ValueError("PAN inputs must hold a single band")
    if (pan.height, pan.width) != (y_up.height, y_up.width) or (
        pan_low.height,
        pan_low.width,
    ) != (y_up.height, y_up.width):
        raise ValueError("PAN planes must match the interpolated band dims")
    detail = pan.data[0] - pan_low.data[0]
    if gains == "additive":
        return y_up.with_data(y_up.data + detail)
    gains_mat = np.vstack(
        [_hpm_gain(band, pan_low.data[0], rng) for band in y_up.data]
    )
    fused = y_up.data + gains_mat * detail
    return y_up.with_data(np.clip(fused, rng.lo, rng.hi))


def box_lowpass(pan: SpectralImage, ratio: int) -> SpectralImage:
    """Normalized (2 ratio + 1)^2 box mean with mirror boundaries."""
    width = 2 * int(ratio) + 1
    taps = np.full(width, 1.0 / width)
    cube = pan.to_cube()
    out = convolve1d(cube, taps, axis=-1, mode="reflect")
    out = convolve1d(out, taps, axis=-2, mode="reflect")
    return pan.with_data(out.reshape(pan.bands, -1))


def glp_lowpass(pan: SpectralImage, ratio: int, gnyq: float = 0.3) -> SpectralImage:
    """Single GLP stage: MTF-matched blur, decimate, interpolate back."""
    kernel = kernel_from_mtf(ratio, gnyq)
    low = blur_downsample(pan, kernel, ratio)
    return upsample(low, ratio, "bicubic")


def _equalized_fusion(
    y_h: SpectralImage,
    pan: SpectralImage,
    pan_low: SpectralImage,
    ratio: int,
    rng: DynamicRange,
    gains: str,
) -> SpectralImage:
    """Shared SFIM / MTF-GLP body: per-band PAN equalization then injection.

    P_eq^k = (P - mean(P)) std(Y^k) / std(P_L) + mean(Y^k); the same affine
    map is applied to P_L so the detail scales consistently. A constant PAN
    has std(P_L) = 0 and maps to a zero-detail injection.
    """
    y_up = upsample(y_h, ratio, "bicubic")
    if (pan.height, pan.width) != (y_up.height, y_up.width):
        raise ValueError("PAN dims must equal the upsampled band dims")
    p = pan.data[0]
    p_l = pan_low.data[0]
    p_mean = p.mean()
    pl_std = p_l.std()
    # Filtering a constant PAN leaves rounding dust with std ~ eps |P|;
    # treat anything at that level as flat instead of dividing by it.
    std_floor = 1e-12 * max(np.abs(p_l).max(), np.abs(p).max())
    fused = np.empty_like(y_up.data)
    for k in range(y_up.bands):
        band = y_up.data[k]
        scale = band.std() / pl_std if pl_std > std_floor else 0.0
        p_eq = (p - p_mean) * scale + band.mean()
        pl_eq = (p_l - p_mean) * scale + band.mean()
        detail = p_eq - pl_eq
        if gains == "additive":
            fused[k] = band + detail
        else:
            fused[k] = band + _hpm_gain(band, pl_eq, rng) * detail
    if gains == "hpm":
        fused = np.clip(fused, rng.lo, rng.hi)
    return y_up.with_data(fused)


def fuse_sfim(
    y_h: SpectralImage, pan: SpectralImage, ratio: int, rng: DynamicRange
) -> SpectralImage:
    """Smoothing-filter-based intensity modulation: box low-pass, HPM gains."""
    pan_low = box_lowpass(pan, ratio)
    return _equalized_fusion(y_h, pan, pan_low, ratio, rng, "hpm")


def fuse_mtf_glp(
    y_h: SpectralImage,
    pan: SpectralImage,
    ratio: int,
    gnyq: float,
    rng: DynamicRange,
) -> SpectralImage:
    """MTF-matched GLP detail with additive injection."""
    pan_low = glp_lowpass(pan, ratio, gnyq)
    return _equalized_fusion(y_h, pan, pan_low, ratio, rng, "additive")


def fuse_mtf_glp_hpm(
    y_h: SpectralImage,
    pan: SpectralImage,
    ratio: int,
    gnyq: float,
    rng: DynamicRange,
) -> SpectralImage:
    """MTF-matched GLP detail with high-pass-modulation gains."""
    pan_low = glp_lowpass(pan, ratio, gnyq)
    return _equalized_fusion(y_h, pan, pan_low, ratio, rng, "hpm")
