"""Projection-matrix estimation from 3D-2D correspondences (homogeneous least squares).

Each correspondence contributes two linear constraints on the 12 parameters:

    (A1 - A9*u)x + (A2 - A10*u)y + (A3 - A11*u)z + (A4 - A12*u) = 0
    (A5 - A9*v)x + (A6 - A10*v)y + (A7 - A11*v)z + (A8 - A12*v) = 0

Stacking them gives a 2n x 12 design matrix D with D @ params = 0; the
estimate is the unit-norm minimizer, i.e. the right singular vector of the
smallest singular value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConfiguration, InsufficientCorrespondences, RankDeficient
from .geometry import Pixel2H, Point3H, ProjectionMatrix, project

MIN_CORRESPONDENCES = 6

# Relative singular-value tolerances, chosen at the double-precision noise floor.
RANK_TOL_REL = 1e-10

# A fiducial cloud counts as non-coplanar when the smallest singular value of
# its centered coordinate matrix exceeds this fraction of the largest.
COPLANARITY_TOL_REL = 1e-6


@dataclass(frozen=True)
class Correspondence:
    """A 3D control point paired with its observed pixel."""

    point: Point3H
    pixel: Pixel2H


@dataclass(frozen=True)
class FiducialSet:
    """Ordered control points with known coordinates in the reference frame."""

    points: tuple[Point3H, ...]
    name: str = "fiducials"

    def __len__(self) -> int:
        return len(self.points)

    def coordinates(self) -> np.ndarray:
        """Cartesian coordinates, shape (n, 3)."""
        return np.array([p.xyz() for p in self.points])

    def centroid(self) -> Point3H:
        c = self.coordinates().mean(axis=0)
        return Point3H(c[0], c[1], c[2], 1.0)

    def thickness_ratio(self) -> float:
        """Smallest over largest singular value of the centered coordinates."""
        coords = self.coordinates()
        centered = coords - coords.mean(axis=0)
        s = np.linalg.svd(centered, compute_uv=False)
        return float(s[-1] / s[0]) if s[0] > 0 else 0.0

    def validate(self) -> None:
        if len(self.points) < MIN_CORRESPONDENCES:
            raise InsufficientCorrespondences(
                f"fiducial set '{self.name}' has {len(self.points)} points; "
                f"need at least {MIN_CORRESPONDENCES}"
            )
        if self.thickness_ratio() <= COPLANARITY_TOL_REL:
            raise DegenerateConfiguration(
                f"fiducial set '{self.name}' is coplanar within tolerance"
            )


def make_correspondences(points, pixels) -> list[Correspondence]:
    """Zip equal-length point and pixel sequences into correspondences."""
    points = list(points)
    pixels = list(pixels)
    if len(points) != len(pixels):
        raise ValueError(f"{len(points)} points vs {len(pixels)} pixels")
    return [Correspondence(q.normalize(), p.normalize()) for q, p in zip(points, pixels)]


def build_design_matrix(correspondences) -> np.ndarray:
    """Stack the two constraint rows per correspondence into a 2n x 12 matrix.

    Raises InsufficientCorrespondences for n < 6 and DegenerateConfiguration
    when the stacked system has rank < 11 (relative tolerance), which is what
    a coplanar control-point cloud produces.
    """
    n = len(correspondences)
    if n < MIN_CORRESPONDENCES:
        raise InsufficientCorrespondences(
            f"{n} correspondences; need at least {MIN_CORRESPONDENCES} for 12 parameters"
        )
    rows = np.zeros((2 * n, 12))
    for i, c in enumerate(correspondences):
        q = c.point.normalize()
        p = c.pixel.normalize()
        x, y, z = q.x, q.y, q.z
        u, v = p.u, p.v
        rows[2 * i] = (x, y, z, 1.0, 0.0, 0.0, 0.0, 0.0, -u * x, -u * y, -u * z, -u)
        rows[2 * i + 1] = (0.0, 0.0, 0.0, 0.0, x, y, z, 1.0, -v * x, -v * y, -v * z, -v)
    s = np.linalg.svd(rows, compute_uv=False)
    if s[10] < RANK_TOL_REL * s[0]:
        raise DegenerateConfiguration(
            "design matrix rank < 11: control points cannot determine the projection"
        )
    return rows


def _pixel_conditioner(pixels: np.ndarray) -> np.ndarray:
    """Similarity mapping pixels to zero centroid and sqrt(2) RMS radius."""
    c = pixels.mean(axis=0)
    rms = math.sqrt(float(((pixels - c) ** 2).sum(axis=1).mean()))
    s = math.sqrt(2.0) / rms if rms > 0 else 1.0
    return np.array([
        [s, 0.0, -s * c[0]],
        [0.0, s, -s * c[1]],
        [0.0, 0.0, 1.0],
    ])


def _point_conditioner(points: np.ndarray) -> np.ndarray:
    """Similarity mapping 3D points to zero centroid and sqrt(3) RMS radius."""
    c = points.mean(axis=0)
    rms = math.sqrt(float(((points - c) ** 2).sum(axis=1).mean()))
    s = math.sqrt(3.0) / rms if rms > 0 else 1.0
    t = np.eye(4)
    t[:3, :3] *= s
    t[:3, 3] = -s * c
    return t


def estimate_projection(correspondences, normalize: bool = True) -> ProjectionMatrix:
    """Least-squares estimate of the 3x4 projection matrix.

    With ``normalize`` on (default), inputs are isotropically centered and
    scaled before the solve and the result de-conditioned afterwards; this
    keeps the solve well-behaved at realistic pixel magnitudes and is
    gauge-identical to the raw formulation on well-conditioned data.

    The returned matrix is in canonical gauge (unit Frobenius norm, positive
    depth at the centroid of the input points).

    Raises RankDeficient when the two smallest singular values of the design
    matrix are relatively tied, meaning the minimizer is not unique.
    """
    correspondences = list(correspondences)
    pts = np.array([c.point.xyz() for c in correspondences]) if correspondences else np.zeros((0, 3))

    working = correspondences
    if normalize and correspondences:
        pix = np.array([c.pixel.uv() for c in correspondences])
        s2 = _pixel_conditioner(pix)
        s3 = _point_conditioner(pts)
        working = []
        for c in correspondences:
            qv = s3 @ c.point.normalize().to_array()
            pv = s2 @ c.pixel.normalize().to_array()
            working.append(Correspondence(Point3H(*qv), Pixel2H(*pv)))

    design = build_design_matrix(working)
    _, s, vt = np.linalg.svd(design)
    if (s[10] - s[11]) < RANK_TOL_REL * s[0]:
        raise RankDeficient(
            "two smallest singular values of the design matrix coincide; "
            "the projection estimate is not unique"
        )
    a = vt[11].reshape(3, 4)
    if normalize and correspondences:
        a = np.linalg.inv(s2) @ a @ s3

    centroid = pts.mean(axis=0)
    anchor = Point3H(centroid[0], centroid[1], centroid[2], 1.0)
    return ProjectionMatrix(a).normalized(anchor)


def reprojection_error(a: ProjectionMatrix, correspondences) -> float:
    """Mean Euclidean pixel distance between observations and reprojections."""
    dists = []
    for c in correspondences:
        predicted = project(a, c.point.normalize()).uv()
        dists.append(float(np.linalg.norm(c.pixel.uv() - predicted)))
    return float(np.mean(dists))
