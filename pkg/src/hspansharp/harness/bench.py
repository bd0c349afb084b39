"""Wald-protocol benchmark: degrade a reference scene, run every selected
fusion method on the degraded pair, and score the results against the
reference.

Timing covers the fusion call only (not I/O or metric evaluation) and can
be disabled (`timing = off`) to make report bytes reproducible run to run.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass

import numpy as np

from ..imgcore import DynamicRange, SpectralImage
from ..metrics import QualityReport, compute_report
from ..sensorsim import (
    NOISE_ALGORITHM,
    SensorModel,
    add_gaussian_noise,
    blur_downsample,
    default_pan_response,
    kernel_from_mtf,
    synth_pan,
)
from .config import RunConfig
from .envi import load_raster, save_raster
from .registry import MethodContext, get_method
from .scene import synth_scene
from .. import __version__

__all__ = [
    "MethodResult",
    "BenchmarkReport",
    "reference_scene",
    "wald_inputs",
    "run_wald",
    "percentile_spectrum",
    "emit_report",
]


@dataclass(frozen=True)
class MethodResult:
    name: str
    report: QualityReport | None
    fused: SpectralImage | None
    error: str | None = None


@dataclass(frozen=True)
class BenchmarkReport:
    config: RunConfig
    results: tuple[MethodResult, ...]
    truth: SpectralImage
    y_h: SpectralImage
    pan: SpectralImage


def _snr_std(rms, snr_db):
    return rms * 10.0 ** (-snr_db / 20.0)


def reference_scene(config: RunConfig) -> SpectralImage:
    """The reference image: loaded from `input` when set, synthetic otherwise."""
    if config.input is not None:
        return load_raster(config.input)
    return synth_scene(
        config.seed, config.endmembers, config.height, config.width, config.bands
    )


def _pan_response(config: RunConfig, truth: SpectralImage) -> np.ndarray:
    if config.pan_weights is not None:
        weights = np.asarray(config.pan_weights, dtype=np.float64)
        if weights.size != truth.bands:
            raise ValueError("pan-weights length must equal the band count")
        total = weights.sum()
        if total <= 0 or (weights < 0).any():
            raise ValueError("pan-weights must be nonnegative with positive sum")
        return weights / total
    window = config.pan_window if config.pan_window is not None else (0.48, 0.69)
    return default_pan_response(truth.bands, truth.wavelengths, tuple(window))


def wald_inputs(
    truth: SpectralImage, config: RunConfig
) -> tuple[SpectralImage, SpectralImage, SensorModel, DynamicRange]:
    """Degrade the reference into the observed pair and assemble the sensor
    model (blur, response, and any noise standard deviations)."""
    ratio = config.ratio
    if truth.height % ratio or truth.width % ratio:
        raise ValueError("reference dims must be divisible by the ratio")
    kernel = kernel_from_mtf(ratio, config.gnyq)
    response = _pan_response(config, truth)

    y_h = blur_downsample(truth, kernel, ratio)
    pan = synth_pan(truth, response)

    hs_stds = np.zeros(truth.bands)
    pan_std = 0.0
    if config.hs_noise_std is not None:
        hs_stds = np.full(truth.bands, config.hs_noise_std)
    elif config.snr_db is not None:
        rms = np.sqrt((y_h.data**2).mean(axis=1))
        hs_stds = _snr_std(rms, config.snr_db)
    if config.pan_noise_std is not None:
        pan_std = config.pan_noise_std
    elif config.snr_db is not None:
        pan_std = _snr_std(float(np.sqrt((pan.data**2).mean())), config.snr_db)

    if hs_stds.any():
        y_h = add_gaussian_noise(y_h, hs_stds, config.seed)
    if pan_std > 0:
        pan = add_gaussian_noise(pan, np.array([pan_std]), config.seed + 1)

    model = SensorModel(
        ratio=ratio,
        blur=kernel,
        spectral_response=response[np.newaxis, :],
        hs_noise_std=hs_stds,
        pan_noise_std=pan_std,
    )
    lo = float(y_h.data.min())
    hi = float(y_h.data.max())
    if hi <= lo:
        hi = lo + 1.0
    return y_h, pan, model, DynamicRange(lo, hi)


def _method_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def run_wald(config: RunConfig, truth: SpectralImage | None = None) -> BenchmarkReport:
    """Run every selected method on the degraded pair; one method failing
    does not abort the rest."""
    config = config.validate()
    if truth is None:
        truth = reference_scene(config)
    y_h, pan, model, rng = wald_inputs(truth, config)
    results = []
    for index, name in enumerate(config.selected_methods()):
        ctx = MethodContext(
            y_h=y_h,
            pan=pan,
            model=model,
            range=rng,
            gnyq=config.gnyq,
            seed=_method_seed(config.seed, index),
            subspace_dim=config.subspace_dim,
            params=config.method_params.get(name),
        )
        method = get_method(name)
        try:
            if config.timing == "wall":
                start = time.perf_counter()
                fused = method(ctx)
                elapsed = time.perf_counter() - start
            else:
                fused = method(ctx)
                elapsed = 0.0
            report = compute_report(fused, truth, 1.0 / config.ratio, elapsed)
            results.append(MethodResult(name, report, fused))
        except Exception as exc:
            results.append(MethodResult(name, None, None, error=str(exc)))
    return BenchmarkReport(config, tuple(results), truth, y_h, pan)


def percentile_spectrum(
    xhat: SpectralImage, x: SpectralImage, rmse_map: SpectralImage, q: float
) -> tuple[int, np.ndarray, np.ndarray]:
    """Pixel whose per-pixel error sits at the q-th percentile of the error
    map (nearest-rank; ties resolved to the lowest pixel index), with the
    reference and estimated spectra at that pixel."""
    if not 0.0 < q <= 100.0:
        raise ValueError("percentile must lie in (0, 100]")
    if rmse_map.bands != 1:
        raise ValueError("the error map must have exactly one band")
    if xhat.pixels != rmse_map.pixels or x.pixels != rmse_map.pixels:
        raise ValueError("images and error map must share pixel count")
    values = rmse_map.data[0]
    rank = int(np.ceil(q / 100.0 * values.size))
    value = np.sort(values, kind="stable")[rank - 1]
    pixel = int(np.flatnonzero(values == value)[0])
    return pixel, x.data[:, pixel].copy(), xhat.data[:, pixel].copy()


def _safe_name(name: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in name.lower())


def _spectra_rows(report: BenchmarkReport) -> list[tuple]:
    rows = []
    for res in report.results:
        if res.report is None:
            continue
        for q in report.config.percentiles:
            pixel, ref, est = percentile_spectrum(
                res.fused, report.truth, res.report.rmse_map, q
            )
            for band in range(ref.size):
                rows.append((res.name, q, pixel, band, ref[band], est[band]))
    return rows


def emit_report(report: BenchmarkReport, output_dir: str | None = None) -> dict:
    """Write report.csv, report.json, spectra.csv, and per-method RMSE map
    rasters; returns the artifact paths.

    All text artifacts use fixed formatting; with timing disabled the bytes
    are identical across repeated runs of the same configuration.
    """
    config = report.config
    out_dir = config.output_dir if output_dir is None else output_dir
    os.makedirs(out_dir, exist_ok=True)

    rows = ["method,CC,SAM,RMSE,ERGAS,time_s"]
    for res in report.results:
        if res.report is None:
            rows.append("%s,nan,nan,nan,nan,nan" % res.name)
            continue
        scalars = res.report.scalars()
        rows.append(
            ",".join(
                [res.name]
                + [
                    "%.17g" % scalars[key]
                    for key in ("CC", "SAM", "RMSE", "ERGAS", "time_s")
                ]
            )
        )
    csv_path = os.path.join(out_dir, "report.csv")
    with open(csv_path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")

    spectra_path = os.path.join(out_dir, "spectra.csv")
    with open(spectra_path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("method,percentile,pixel,band,reference,estimate\n")
        for name, q, pixel, band, ref, est in _spectra_rows(report):
            fh.write(
                "%s,%.17g,%d,%d,%.17g,%.17g\n" % (name, q, pixel, band, ref, est)
            )

    spectra_json = {}
    for res in report.results:
        if res.report is None:
            continue
        per_q = {}
        for q in config.percentiles:
            pixel, ref, est = percentile_spectrum(
                res.fused, report.truth, res.report.rmse_map, q
            )
            per_q["%g" % q] = {
                "pixel": pixel,
                "reference": [float(v) for v in ref],
                "estimate": [float(v) for v in est],
            }
        spectra_json[res.name] = per_q
    payload = {
        "version": __version__,
        "noise_algorithm": NOISE_ALGORITHM,
        "config": config.to_dict(),
        "errors": {r.name: r.error for r in report.results if r.error},
        "percentile_spectra": spectra_json,
    }
    json_path = os.path.join(out_dir, "report.json")
    with open(json_path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")

    map_paths = {}
    for res in report.results:
        if res.report is None:
            continue
        base = os.path.join(out_dir, "rmse_map_" + _safe_name(res.name))
        map_paths[res.name] = save_raster(base, res.report.rmse_map)
    return {
        "csv": csv_path,
        "json": json_path,
        "spectra": spectra_path,
        "rmse_maps": map_paths,
    }
