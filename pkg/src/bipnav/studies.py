"""The canned simulation studies and table emission.

Three studies cover the standard questions about the pipeline:

* rotation / translation sweeps with pixel noise at a negligible floor
  (primary effect of installation misalignment),
* a misalignment-level x pixel-noise grid scored by tail risk (coupling),
* a side-by-side of Monte Carlo spread and first-order analytic prediction.

Every study is a pure function of (config, seed); emission writes a wide CSV
mirroring the table, a JSON sidecar with the full config and raw statistics,
and a long-format CSV for external plotting.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from pathlib import Path

import numpy as np

from .dlt import estimate_projection, make_correspondences
from .engine import BatchFailure, BatchResult, all_failed, run_batch
from .geometry import Point3H, project
from .perturb import bias_control_points
from .propagate import (
    InputCovariance,
    PointCovariance,
    jacobian_wrt_inputs,
    jacobian_wrt_params,
    propagate_matrix_covariance,
    propagate_point_covariance,
)
from .scenario import (
    MISALIGNMENT_LEVELS,
    SCHEMA_VERSION,
    ScenarioConfig,
    with_noise,
    with_reference_bias,
)
from .stats import axis_stats, summarize
from .triangulate import BiplanarObservation, triangulate

ROTATION_SWEEP_DEG = (0.0, 0.5, 1.0, 1.5, 2.0)
TRANSLATION_SWEEP_MM = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0)
GRID_SIGMA_PX = (0.0, 2.0, 5.0)

SIM3_SIGMA_PX = 2.0


@dataclasses.dataclass(frozen=True)
class SweepResult:
    """One table: fixed columns, one row per condition, plus raw statistics."""

    name: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    config: dict
    seed: int
    raw: tuple[dict, ...]


def _batch_stats(batch: BatchResult) -> dict:
    if all_failed(batch):
        raise BatchFailure(
            f"all {batch.trials} trials failed (first: {batch.failures[0].reason})"
        )
    return {
        "e_3d_mm": dataclasses.asdict(summarize(batch.e3d())),
        "e_tcp_mm": dataclasses.asdict(summarize(batch.etcp())),
        "e_reproj_px": dataclasses.asdict(summarize(batch.ereproj())),
        "failures": len(batch.failures),
    }


def sim1_rotation(base: ScenarioConfig, workers: int = 1) -> SweepResult:
    """Sweep the rotational misalignment with translation at zero."""
    rows = []
    raw = []
    for angle in ROTATION_SWEEP_DEG:
        batch = run_batch(with_reference_bias(base, angle, 0.0), workers=workers)
        stats = _batch_stats(batch)
        raw.append({"rotation_deg": angle, **stats})
        rows.append((
            angle,
            stats["e_3d_mm"]["mean"],
            stats["e_tcp_mm"]["mean"],
            stats["e_tcp_mm"]["p95"],
        ))
    return SweepResult(
        name="sim1_rotation",
        columns=("angle_deg", "mean_e3d_mm", "mean_etcp_mm", "p95_etcp_mm"),
        rows=tuple(rows),
        config=base.to_dict(),
        seed=base.seed,
        raw=tuple(raw),
    )


def sim1_translation(base: ScenarioConfig, workers: int = 1) -> SweepResult:
    """Sweep the translational misalignment with rotation at zero."""
    rows = []
    raw = []
    for shift in TRANSLATION_SWEEP_MM:
        batch = run_batch(with_reference_bias(base, 0.0, shift), workers=workers)
        stats = _batch_stats(batch)
        raw.append({"translation_mm": shift, **stats})
        rows.append((
            shift,
            stats["e_3d_mm"]["mean"],
            stats["e_tcp_mm"]["mean"],
            stats["e_tcp_mm"]["p95"],
        ))
    return SweepResult(
        name="sim1_translation",
        columns=("translation_mm", "mean_e3d_mm", "mean_etcp_mm", "p95_etcp_mm"),
        rows=tuple(rows),
        config=base.to_dict(),
        seed=base.seed,
        raw=tuple(raw),
    )


def sim2_coupled_grid(base: ScenarioConfig, workers: int = 1) -> SweepResult:
    """Misalignment level x pixel noise grid, scored by execution-error P95."""
    rows = []
    raw = []
    for level, (rot_deg, trans_mm) in MISALIGNMENT_LEVELS.items():
        for sigma in GRID_SIGMA_PX:
            config = with_noise(with_reference_bias(base, rot_deg, trans_mm), sigma)
            batch = run_batch(config, workers=workers)
            stats = _batch_stats(batch)
            raw.append({"level": level, "sigma_px": sigma, **stats})
            rows.append((level, sigma, stats["e_tcp_mm"]["p95"]))
    return SweepResult(
        name="sim2_coupled_grid",
        columns=("level", "sigma_px", "p95_etcp_mm"),
        rows=tuple(rows),
        config=base.to_dict(),
        seed=base.seed,
        raw=tuple(raw),
    )


def analytic_prediction(config: ScenarioConfig) -> tuple[Point3H, PointCovariance]:
    """First-order prediction for a scenario: plug-in mean and 3x3 covariance.

    The chain is evaluated at the effective geometry: matrices estimated from
    the noiseless (bias-shifted) observations, Jacobians at the noiseless
    solution.
    """
    bias = config.bias.build()
    view1_true, view2_true = config.rig.build_views()
    physical = bias_control_points(config.fiducials, bias)
    solver_points = [p.normalize() for p in config.fiducials.points]

    estimates = []
    input_cov = InputCovariance.isotropic(
        len(solver_points), config.noise.sigma_px, config.noise.fiducial_sigma_mm
    )
    matrix_covs = []
    correspondences = []
    for view_true in (view1_true, view2_true):
        pixels = [project(view_true, p).normalize() for p in physical.points]
        corr = make_correspondences(solver_points, pixels)
        estimate = estimate_projection(corr)
        j_params = jacobian_wrt_params(corr)
        j_inputs = jacobian_wrt_inputs(estimate, corr)
        matrix_covs.append(propagate_matrix_covariance(j_params, j_inputs, input_cov))
        estimates.append(estimate)
        correspondences.append(corr)

    target = config.target_point()
    obs = BiplanarObservation(
        project(view1_true, target).normalize(),
        project(view2_true, target).normalize(),
        estimates[0],
        estimates[1],
    )
    mean = triangulate(obs).point
    pixel_cov = config.noise.sigma_px**2 * np.eye(2)
    covariance = propagate_point_covariance(
        obs, pixel_cov, pixel_cov, matrix_covs[0], matrix_covs[1]
    )
    return mean, covariance


def sim3_analytic_vs_mc(base: ScenarioConfig, workers: int = 1) -> SweepResult:
    """Monte Carlo axis statistics against the first-order prediction.

    The representative condition is the base scenario with pixel noise at
    2 px (bias left as configured; zero in the default scene).
    """
    config = with_noise(base, SIM3_SIGMA_PX)
    batch = run_batch(config, workers=workers)
    if all_failed(batch):
        raise BatchFailure(f"all {batch.trials} trials failed")
    mc = axis_stats(batch.outcomes, config.target_point())
    ana_mean, ana_cov = analytic_prediction(config)
    ana_std = ana_cov.axis_std()

    rows = []
    for i, axis in enumerate(("X", "Y", "Z")):
        ratio = mc.std[i] / ana_std[i] if ana_std[i] > 0 else float("inf")
        rows.append((
            axis,
            float(mc.mean[i]),
            float(ana_mean.xyz()[i]),
            float(mc.std[i]),
            float(ana_std[i]),
            float(ratio),
        ))
    raw = ({
        "sigma_px": SIM3_SIGMA_PX,
        "mc_covariance": mc.covariance.tolist(),
        "analytic_covariance": ana_cov.matrix.tolist(),
        "failures": len(batch.failures),
    },)
    return SweepResult(
        name="sim3_analytic_vs_mc",
        columns=(
            "axis", "mc_mean_mm", "ana_mean_mm", "mc_std_mm", "ana_std_mm",
            "std_ratio_mc_over_ana",
        ),
        rows=tuple(rows),
        config=config.to_dict(),
        seed=config.seed,
        raw=raw,
    )


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_results(result: SweepResult, out_dir, stem: str | None = None) -> list[Path]:
    """Write the wide CSV, the JSON sidecar and the long-format CSV.

    Output is byte-identical for identical (config, seed) runs: fixed column
    order, '.' decimal separator, LF line endings, full-precision floats.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = stem or result.name
    paths = []

    csv_path = out / f"{stem}.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(result.columns)
        for row in result.rows:
            writer.writerow([_cell(v) for v in row])
    paths.append(csv_path)

    json_path = out / f"{stem}.json"
    sidecar = {
        "schema_version": SCHEMA_VERSION,
        "study": result.name,
        "seed": result.seed,
        "columns": list(result.columns),
        "rows": [list(r) for r in result.rows],
        "config": result.config,
        "raw": list(result.raw),
    }
    json_path.write_text(json.dumps(sidecar, indent=2) + "\n", encoding="utf-8")
    paths.append(json_path)

    # Long format: the leading non-metric columns identify the condition.
    n_keys = 2 if result.name == "sim2_coupled_grid" else 1
    long_path = out / f"{stem}_long.csv"
    with open(long_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*result.columns[:n_keys], "metric", "value"])
        for row in result.rows:
            for name, value in zip(result.columns[n_keys:], row[n_keys:]):
                writer.writerow([*(_cell(v) for v in row[:n_keys]), name, _cell(value)])
    paths.append(long_path)
    return paths
