"""Full-reference quality metrics for fused hyperspectral images.

CC averages per-band Pearson correlation, SAM averages the per-pixel
spectral angle in degrees, RMSE is the Frobenius error normalized by the
total sample count, and ERGAS is the resolution-weighted relative RMSE.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imgcore import SpectralImage

__all__ = [
    "cc",
    "sam",
    "rmse",
    "rmse_per_band",
    "rmse_map",
    "ergas",
    "QualityReport",
    "compute_report",
]


def _paired(xhat: SpectralImage, x: SpectralImage):
    if (xhat.height, xhat.width, xhat.bands) != (x.height, x.width, x.bands):
        raise ValueError(
            "images disagree in shape: "
            f"{xhat.bands}x{xhat.height}x{xhat.width} vs "
            f"{x.bands}x{x.height}x{x.width}"
        )
    return xhat.data, x.data


def cc(xhat: SpectralImage, x: SpectralImage) -> float:
    """Mean over bands of the Pearson correlation coefficient.

    The cosine is formed from squared sums so identical inputs give exactly 1.
    """
    a, b = _paired(xhat, x)
    da = a - a.mean(axis=1, keepdims=True)
    db = b - b.mean(axis=1, keepdims=True)
    sa = (da * da).sum(axis=1)
    sb = (db * db).sum(axis=1)
    if (sa == 0).any() or (sb == 0).any():
        raise ValueError("correlation undefined for a zero-variance band")
    num = (da * db).sum(axis=1)
    vals = np.sign(num) * np.sqrt(np.minimum((num * num) / (sa * sb), 1.0))
    return float(vals.mean())


def sam(xhat: SpectralImage, x: SpectralImage) -> float:
    """Mean spectral angle over pixels, in degrees.

    The arccos argument is clamped to [-1, 1]; the ratio is formed from
    squared terms so identical spectra give an exactly zero angle.
    """
    a, b = _paired(xhat, x)
    dot = (a * b).sum(axis=0)
    sa = (a * a).sum(axis=0)
    sb = (b * b).sum(axis=0)
    if (sa == 0).any() or (sb == 0).any():
        raise ValueError("spectral angle undefined for a zero spectrum")
    cosv = np.sign(dot) * np.sqrt(np.clip((dot * dot) / (sa * sb), 0.0, 1.0))
    ang = np.arccos(cosv)
    return float(np.degrees(ang.mean()))


def rmse(xhat: SpectralImage, x: SpectralImage) -> float:
    """Frobenius error over sqrt(pixels * bands)."""
    a, b = _paired(xhat, x)
    return float(np.linalg.norm(a - b) / np.sqrt(a.size))


def rmse_per_band(xhat: SpectralImage, x: SpectralImage) -> np.ndarray:
    a, b = _paired(xhat, x)
    d = a - b
    return np.sqrt((d * d).mean(axis=1))


def rmse_map(xhat: SpectralImage, x: SpectralImage) -> SpectralImage:
    """Single-band image of per-pixel spectral RMSE."""
    a, b = _paired(xhat, x)
    d = a - b
    vals = np.sqrt((d * d).mean(axis=0))
    return SpectralImage(x.height, x.width, vals[np.newaxis, :])


def ergas(xhat: SpectralImage, x: SpectralImage, d: float) -> float:
    """100 d sqrt(mean_k (RMSE_k / mu_k)^2) with d the resolution ratio
    (low over high, e.g. 1/5 for 5x sharpening)."""
    d = float(d)
    if d <= 0:
        raise ValueError("resolution ratio d must be positive")
    a, b = _paired(xhat, x)
    mu = b.mean(axis=1)
    if (mu == 0).any():
        raise ValueError("ERGAS undefined for a zero-mean reference band")
    per_band = rmse_per_band(xhat, x)
    return float(100.0 * d * np.sqrt(((per_band / mu) ** 2).mean()))


@dataclass(frozen=True)
class QualityReport:
    """Scalar metrics plus the diagnostic error fields for one method."""

    cc: float
    sam_deg: float
    rmse: float
    ergas: float
    rmse_per_band: tuple
    rmse_map: SpectralImage
    wall_time_s: float = 0.0

    def scalars(self) -> dict:
        return {
            "CC": self.cc,
            "SAM": self.sam_deg,
            "RMSE": self.rmse,
            "ERGAS": self.ergas,
            "time_s": self.wall_time_s,
        }


def compute_report(
    xhat: SpectralImage, x: SpectralImage, d: float, wall_time_s: float = 0.0
) -> QualityReport:
    return QualityReport(
        cc=cc(xhat, x),
        sam_deg=sam(xhat, x),
        rmse=rmse(xhat, x),
        ergas=ergas(xhat, x, d),
        rmse_per_band=tuple(float(v) for v in rmse_per_band(xhat, x)),
        rmse_map=rmse_map(xhat, x),
        wall_time_s=wall_time_s,
    )
