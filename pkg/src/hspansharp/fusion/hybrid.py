"""Guided-filter PCA fusion: leading principal components are sharpened by
edge-preserving filtering against the high-resolution guide, trailing
components are denoised by soft thresholding and interpolated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..imgcore import SpectralImage
from ..resample import upsample
from .cs import pca_transform

__all__ = [
    "GuidedFilterParams",
    "guided_filter",
    "soft_threshold",
    "fuse_gfpca",
]


@dataclass(frozen=True)
class GuidedFilterParams:
    """Window radius d (Chebyshev, window side 2d + 1) and regularizer eps."""

    radius: int
    epsilon: float

    def __post_init__(self):
        object.__setattr__(self, "radius", int(self.radius))
        object.__setattr__(self, "epsilon", float(self.epsilon))
        if self.radius < 1:
            raise ValueError("guided filter radius must be >= 1")
        if self.epsilon < 0:
            raise ValueError("guided filter epsilon must be >= 0")


def _window_sums(plane: np.ndarray, d: int) -> np.ndarray:
    """Sum of each (2d+1)^2 window clipped to the image, via integral images."""
    h, w = plane.shape
    ii = np.zeros((h + 1, w + 1))
    ii[1:, 1:] = plane.cumsum(axis=0).cumsum(axis=1)
    r0 = np.maximum(np.arange(h) - d, 0)
    r1 = np.minimum(np.arange(h) + d, h - 1) + 1
    c0 = np.maximum(np.arange(w) - d, 0)
    c1 = np.minimum(np.arange(w) + d, w - 1) + 1
    return (
        ii[np.ix_(r1, c1)]
        - ii[np.ix_(r0, c1)]
        - ii[np.ix_(r1, c0)]
        + ii[np.ix_(r0, c0)]
    )


def _window_counts(h: int, w: int, d: int) -> np.ndarray:
    rows = np.minimum(np.arange(h) + d, h - 1) - np.maximum(np.arange(h) - d, 0) + 1
    cols = np.minimum(np.arange(w) + d, w - 1) - np.maximum(np.arange(w) - d, 0) + 1
    return rows[:, np.newaxis] * cols[np.newaxis, :].astype(np.float64)


def guided_filter_plane(
    inp: np.ndarray, guide: np.ndarray, d: int, eps: float
) -> np.ndarray:
    """He-style guided filter on 2-D arrays with border-clipped windows."""
    counts = _window_counts(*inp.shape, d)
    mean_i = _window_sums(guide, d) / counts
    mean_p = _window_sums(inp, d) / counts
    corr_ip = _window_sums(guide * inp, d) / counts
    corr_ii = _window_sums(guide * guide, d) / counts
    cov_ip = corr_ip - mean_i * mean_p
    var_i = corr_ii - mean_i * mean_i
    denom = var_i + eps
    a = np.where(denom > 0.0, cov_ip / np.where(denom > 0.0, denom, 1.0), 0.0)
    b = mean_p - a * mean_i
    mean_a = _window_sums(a, d) / counts
    mean_b = _window_sums(b, d) / counts
    return mean_a * guide + mean_b


def guided_filter(
    inp: SpectralImage, guide: SpectralImage, params: GuidedFilterParams
) -> SpectralImage:
    """Filter a single-band image using a single-band guide."""
    if inp.bands != 1 or guide.bands != 1:
        raise ValueError("guided filter expects single-band input and guide")
    if (inp.height, inp.width) != (guide.height, guide.width):
        raise ValueError("input and guide dims must agree")
    out = guided_filter_plane(
        inp.band_image(0), guide.band_image(0), params.radius, params.epsilon
    )
    return inp.with_data(out.reshape(1, -1))


def soft_threshold(values: np.ndarray, tau: float) -> np.ndarray:
    """sign(v) max(|v| - tau, 0) elementwise."""
    if tau < 0:
        raise ValueError("threshold must be nonnegative")
    v = np.asarray(values, dtype=np.float64)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def _mad_sigma(values: np.ndarray) -> float:
    med = np.median(values)
    return 1.4826 * float(np.median(np.abs(values - med)))


def default_component_count(variances: np.ndarray, energy: float = 0.995, cap: int = 10) -> int:
    """Smallest leading component count explaining `energy` of the variance."""
    total = variances.sum()
    frac = np.cumsum(variances) / total
    p = int(np.searchsorted(frac, energy) + 1)
    return min(p, cap, variances.size)


def fuse_gfpca(
    y_h: SpectralImage,
    guide: SpectralImage,
    ratio: int,
    p: int | None = None,
    params: GuidedFilterParams | None = None,
    tau: float | None = None,
) -> SpectralImage:
    """PCA-decorrelate Y_H, guided-filter the first p upsampled components
    against the guide bands (averaged over guide bands), soft-threshold and
    interpolate the rest, then invert the PCA at the guide scale.

    Defaults: p explains >= 99.5% variance (capped at 10), window radius =
    ratio, eps = 1e-4 (value span)^2, tau = MAD noise scale of the discarded
    components.
    """
    ratio = int(ratio)
    if guide.bands not in (1, 3):
        raise ValueError("guide must hold one or three bands")
    if (guide.height, guide.width) != (y_h.height * ratio, y_h.width * ratio):
        raise ValueError("guide dims must equal the upsampled Y_H dims")
    transform = pca_transform(y_h)
    scores = transform.forward(y_h.data)
    if p is None:
        p = default_component_count(transform.variances)
    if not 1 <= p <= y_h.bands:
        raise ValueError(f"component count {p} out of range")
    if params is None:
        span = float(y_h.data.max() - y_h.data.min())
        params = GuidedFilterParams(radius=ratio, epsilon=1e-4 * span**2)
    if tau is None:
        tau = _mad_sigma(scores[p:].ravel()) if p < y_h.bands else 0.0

    guide_planes = guide.to_cube()
    out_rows = []
    for i in range(y_h.bands):
        channel = SpectralImage(y_h.height, y_h.width, scores[i][np.newaxis, :])
        if i < p:
            up = upsample(channel, ratio, "bicubic").band_image(0)
            filtered = np.mean(
                [
                    guided_filter_plane(up, g, params.radius, params.epsilon)
                    for g in guide_planes
                ],
                axis=0,
            )
            out_rows.append(filtered.ravel())
        else:
            shrunk = channel.with_data(soft_threshold(channel.data, tau))
            out_rows.append(upsample(shrunk, ratio, "bicubic").data[0])
    fused_scores = np.vstack(out_rows)
    return SpectralImage(
        guide.height,
        guide.width,
        transform.inverse(fused_scores),
        y_h.wavelengths,
    )
