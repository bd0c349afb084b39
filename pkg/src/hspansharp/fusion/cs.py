"""Component-substitution pansharpening: PCA, Gram-Schmidt, and GS Adaptive.

All three share the same injection skeleton: a spectrally weighted intensity
O_L is formed from the interpolated hyperspectral bands, the PAN image is
moment-matched to it, and the detail (P - O_L) is injected with per-band
gains.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..imgcore import SpectralImage
from ..resample import upsample
from ..sensorsim import BlurKernel, blur_downsample

__all__ = [
    "CsWeights",
    "PcaTransform",
    "pca_transform",
    "match_moments",
    "cs_fuse",
    "fuse_pca",
    "fuse_gs",
    "gsa_weights",
    "fuse_gsa",
]


@dataclass(frozen=True)
class CsWeights:
    """Intensity weights w and injection gains g, one entry per band."""

    w: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64).ravel().copy()
        g = np.asarray(self.g, dtype=np.float64).ravel().copy()
        if w.size != g.size:
            raise ValueError("w and g must have one entry per band each")
        if not (np.isfinite(w).all() and np.isfinite(g).all()):
            raise ValueError("weights must be finite")
        w.flags.writeable = False
        g.flags.writeable = False
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "g", g)


@dataclass(frozen=True)
class PcaTransform:
    """Orthonormal loadings (rows = components, descending variance) plus the
    band means removed before projection."""

    loadings: np.ndarray
    band_means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        L = np.asarray(self.loadings, dtype=np.float64).copy()
        mu = np.asarray(self.band_means, dtype=np.float64).ravel().copy()
        var = np.asarray(self.variances, dtype=np.float64).ravel().copy()
        if L.shape[0] != L.shape[1] or L.shape[0] != mu.size or var.size != mu.size:
            raise ValueError("loadings must be square with matching means")
        if not np.allclose(L @ L.T, np.eye(L.shape[0]), rtol=0, atol=1e-10):
            raise ValueError("loadings must be orthonormal")
        if (np.diff(var) > 1e-10 * max(var.max(initial=0.0), 1.0)).any():
            raise ValueError("component variances must be nonincreasing")
        for arr in (L, mu, var):
            arr.flags.writeable = False
        object.__setattr__(self, "loadings", L)
        object.__setattr__(self, "band_means", mu)
        object.__setattr__(self, "variances", var)

    def forward(self, data: np.ndarray) -> np.ndarray:
        return self.loadings @ (data - self.band_means[:, np.newaxis])

    def inverse(self, scores: np.ndarray) -> np.ndarray:
        return self.loadings.T @ scores + self.band_means[:, np.newaxis]


def pca_transform(img: SpectralImage) -> PcaTransform:
    """Principal components of the band covariance (population normalization),
    each loading row signed so its largest-magnitude entry is positive."""
    data = img.data
    mu = data.mean(axis=1)
    centered = data - mu[:, np.newaxis]
    cov = (centered @ centered.T) / img.pixels
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals = np.maximum(evals[order], 0.0)
    loadings = evecs[:, order].T
    if evals[0] <= 1e-12 * max(1.0, float(np.abs(data).max())) ** 2:
        raise ValueError("degenerate PCA: image has no spectral variance")
    signs = np.sign(loadings[np.arange(loadings.shape[0]),
                             np.abs(loadings).argmax(axis=1)])
    loadings = loadings * np.where(signs == 0, 1.0, signs)[:, np.newaxis]
    return PcaTransform(loadings, mu, evals)


def match_moments(values: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Affine-map `values` onto the mean and variance of `target`.

    A zero-variance input carries no spatial information, so it maps to the
    target itself (identity substitution).
    """
    v_std = values.std()
    if v_std == 0.0:
        return target.copy()
    scale = target.std() / v_std
    return (values - values.mean()) * scale + target.mean()


def _pan_values(pan: SpectralImage, height: int, width: int) -> np.ndarray:
    if pan.bands != 1:
        raise ValueError("PAN image must hold a single band")
    if (pan.height, pan.width) != (height, width):
        raise ValueError("PAN dims disagree with the interpolated bands")
    return pan.data[0]


def cs_fuse(
    y_up: SpectralImage,
    pan: SpectralImage,
    weights: CsWeights,
    match_histogram: bool = False,
) -> SpectralImage:
    """Inject (P - O_L) with per-band gains, O_L = sum_i w_i Y^i."""
    if weights.w.size != y_up.bands:
        raise ValueError("weights must have one entry per band")
    p = _pan_values(pan, y_up.height, y_up.width)
    o_l = weights.w @ y_up.data
    if match_histogram:
        p = match_moments(p, o_l)
    detail = p - o_l
    return y_up.with_data(y_up.data + weights.g[:, np.newaxis] * detail)


def fuse_pca(y_h: SpectralImage, pan: SpectralImage, ratio: int) -> SpectralImage:
    """Substitute the first principal component by the moment-matched PAN."""
    y_up = upsample(y_h, ratio, "bicubic")
    transform = pca_transform(y_up)
    scores = transform.forward(y_up.data)
    p = _pan_values(pan, y_up.height, y_up.width)
    scores = np.concatenate(
        [match_moments(p, scores[0])[np.newaxis, :], scores[1:]], axis=0
    )
    return y_up.with_data(transform.inverse(scores))


def _gain_vector(y_up: SpectralImage, o_l: np.ndarray) -> np.ndarray:
    var = o_l.var()
    if var == 0.0:
        raise ValueError("intensity component has zero variance")
    centered = o_l - o_l.mean()
    covs = (y_up.data - y_up.data.mean(axis=1, keepdims=True)) @ centered
    return covs / (var * o_l.size)


def fuse_gs(y_h: SpectralImage, pan: SpectralImage, ratio: int) -> SpectralImage:
    """Gram-Schmidt sharpening: uniform intensity weights, covariance gains."""
    y_up = upsample(y_h, ratio, "bicubic")
    w = np.full(y_up.bands, 1.0 / y_up.bands)
    g = _gain_vector(y_up, w @ y_up.data)
    return cs_fuse(y_up, pan, CsWeights(w, g), match_histogram=True)


def gsa_weights(y_h_matrix: np.ndarray, pan_low: np.ndarray, ridge: float = 1e-8) -> np.ndarray:
    """Least-squares weights fitting the degraded PAN from the HS bands,
    solved via the normal equations with a ridge when rank deficient."""
    y = np.asarray(y_h_matrix, dtype=np.float64)
    p = np.asarray(pan_low, dtype=np.float64).ravel()
    if y.shape[1] != p.size:
        raise ValueError("band matrix and degraded PAN disagree in pixels")
    gram = y @ y.T
    rhs = y @ p
    evals = np.linalg.eigvalsh(gram)
    if evals[0] <= 1e-12 * max(evals[-1], 1.0):
        gram = gram + ridge * np.eye(gram.shape[0])
    return np.linalg.solve(gram, rhs)


def fuse_gsa(
    y_h: SpectralImage,
    pan: SpectralImage,
    ratio: int,
    blur: BlurKernel,
    phase: int | None = None,
) -> SpectralImage:
    """GS Adaptive: intensity weights regressed against the PAN degraded to
    the hyperspectral grid, then the usual GS injection."""
    pan_low = blur_downsample(pan, blur, ratio, phase)
    w = gsa_weights(y_h.data, pan_low.data[0])
    y_up = upsample(y_h, ratio, "bicubic")
    g = _gain_vector(y_up, w @ y_up.data)
    return cs_fuse(y_up, pan, CsWeights(w, g), match_histogram=True)
