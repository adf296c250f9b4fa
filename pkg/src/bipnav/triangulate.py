"""Two-view reconstruction of a 3D point from its pixel observations.

Each view contributes two homogeneous constraints (pixel cross projection);
stacked they form a 4x4 system N @ [x y z 1]^T = 0 solved by SVD, the
solution being the right singular vector of the smallest singular value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PointAtInfinity, WeakGeometry
from .geometry import Pixel2H, Point3H, ProjectionMatrix

INFINITY_TOL = 1e-10

# Below this ratio of the 3rd to 4th singular value the system is close to
# rank 2: the viewing rays barely intersect.  The nominal 90-degree biplanar
# rig sits orders of magnitude above it.
WEAK_GEOMETRY_RATIO = 10.0


@dataclass(frozen=True, eq=False)
class BiplanarObservation:
    """A pixel pair with the projection matrix of each view."""

    pixel1: Pixel2H
    pixel2: Pixel2H
    view1: ProjectionMatrix
    view2: ProjectionMatrix


@dataclass(frozen=True)
class TriangulationResult:
    point: Point3H
    condition_ratio: float
    residual: float


def build_n_matrix(obs: BiplanarObservation) -> np.ndarray:
    """Stack the four ray constraints into the 4x4 homogeneous system."""
    u1, v1 = obs.pixel1.uv()
    u2, v2 = obs.pixel2.uv()
    a = obs.view1.matrix
    b = obs.view2.matrix
    return np.vstack([
        u1 * a[2] - a[0],
        v1 * a[2] - a[1],
        u2 * b[2] - b[0],
        v2 * b[2] - b[1],
    ])


def triangulate(obs: BiplanarObservation) -> TriangulationResult:
    """Solve the stacked two-view system for the 3D point.

    Raises WeakGeometry when the system is close to rank 2 (near-parallel
    rays, e.g. identical views) and PointAtInfinity when the homogeneous
    solution cannot be normalized.
    """
    n = build_n_matrix(obs)
    _, s, vt = np.linalg.svd(n)
    if s[2] <= 0.0 or not np.isfinite(s[2]):
        raise WeakGeometry("triangulation system has rank <= 2")
    cond = float(s[2] / s[3]) if s[3] > 0.0 else float("inf")
    if cond < WEAK_GEOMETRY_RATIO:
        raise WeakGeometry(
            f"singular value ratio {cond:.2f} below {WEAK_GEOMETRY_RATIO}; "
            "views are nearly degenerate for this point"
        )
    solution = vt[3]
    if abs(solution[3]) < INFINITY_TOL:
        raise PointAtInfinity(
            f"homogeneous solution has |w| = {abs(solution[3]):.3e}"
        )
    point = Point3H(*(solution[:3] / solution[3]), 1.0)
    residual = float(s[3] / s[2])
    return TriangulationResult(point=point, condition_ratio=cond, residual=residual)
