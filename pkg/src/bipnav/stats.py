"""Error statistics and tail-risk summaries over trial batches."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptySample
from .geometry import Point3H
from .propagate import PointCovariance

# MC std more than 25% above the analytic prediction counts as underestimation.
UNDERESTIMATE_RATIO = 1.25


@dataclass(frozen=True)
class ErrorStats:
    """Mean / std / 95th percentile / worst case of a nonnegative error sample."""

    mean: float
    std: float
    p95: float
    worst: float
    count: int


@dataclass(frozen=True, eq=False)
class AxisStats:
    """Per-axis location and spread of reconstructed coordinates."""

    mean: np.ndarray  # (3,)
    std: np.ndarray  # (3,)
    covariance: np.ndarray  # (3, 3) empirical, about the sample mean
    mean_offset: np.ndarray  # (3,) sample mean minus ground truth
    count: int


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    """Monte Carlo spread against the analytic prediction."""

    std_ratio: np.ndarray  # (3,) MC std / analytic std per axis
    principal_angle_deg: float
    analytic_underestimates: bool


def summarize(samples) -> ErrorStats:
    """Summary statistics; percentile uses linear interpolation between ranks.

    The percentile convention is the common "type 7" one (numpy default), so
    e.g. samples 1..100 give P95 = 95.05.  Std uses the n-1 denominator and
    is 0 for a single sample.
    """
    arr = np.asarray(list(samples), dtype=float)
    if arr.size == 0:
        raise EmptySample("cannot summarize zero samples")
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return ErrorStats(
        mean=float(arr.mean()),
        std=std,
        p95=float(np.percentile(arr, 95)),
        worst=float(arr.max()),
        count=int(arr.size),
    )


def percentile(samples, q: float) -> float:
    arr = np.asarray(list(samples), dtype=float)
    if arr.size == 0:
        raise EmptySample("cannot take a percentile of zero samples")
    return float(np.percentile(arr, q))


def axis_stats(outcomes, truth: Point3H) -> AxisStats:
    """Per-axis mean/std and empirical covariance of reconstructed points."""
    coords = np.array([o.q_hat.xyz() for o in outcomes])
    if coords.size == 0:
        raise EmptySample("cannot compute axis statistics over zero outcomes")
    if coords.shape[0] < 2:
        raise EmptySample("axis statistics need at least 2 outcomes")
    mean = coords.mean(axis=0)
    centered = coords - mean
    cov = centered.T @ centered / (coords.shape[0] - 1)
    return AxisStats(
        mean=mean,
        std=coords.std(axis=0, ddof=1),
        covariance=cov,
        mean_offset=mean - truth.xyz(),
        count=coords.shape[0],
    )


def _leading_eigvec(cov: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(cov)
    return vecs[:, -1]


def compare_analytic_mc(axis: AxisStats, analytic: PointCovariance) -> ComparisonReport:
    """Per-axis std ratios and principal-direction alignment of the two covariances."""
    ana_std = analytic.axis_std()
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(ana_std > 0, axis.std / ana_std, np.inf)
        ratio = np.where((ana_std == 0) & (axis.std == 0), 1.0, ratio)
    v_mc = _leading_eigvec(axis.covariance)
    v_ana = _leading_eigvec(analytic.matrix)
    cosine = min(1.0, abs(float(v_mc @ v_ana)))
    return ComparisonReport(
        std_ratio=ratio,
        principal_angle_deg=math.degrees(math.acos(cosine)),
        analytic_underestimates=bool(np.any(ratio > UNDERESTIMATE_RATIO)),
    )
