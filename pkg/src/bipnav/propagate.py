"""First-order covariance propagation through both estimation stages.

Stage one maps the per-correspondence input covariance (3D coordinates and
pixels) to a 12x12 covariance of the estimated projection parameters via the
implicit constraint system: J_params @ d(params) = -J_inputs @ d(inputs), so

    cov_params = P @ (J_inputs @ cov_inputs @ J_inputs^T) @ P^T

with P the pseudoinverse of J_params restricted to its 11-dimensional row
space (the overall-scale gauge direction carries no information and is
projected out).

Stage two treats the four triangulation constraints the same way: the 4x3
Jacobian with respect to the point is pseudo-inverted and applied to the
covariance of the stacked inputs (two pixel pairs and two parameter sets).

All Jacobians are evaluated at the effective geometry, i.e. at the estimated
(possibly bias-shifted) matrices and the observed data, which is what makes
the propagation sensitive to installation bias through conditioning changes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dlt import build_design_matrix
from .errors import IllConditioned
from .geometry import ProjectionMatrix
from .triangulate import BiplanarObservation, build_n_matrix, triangulate

GAUGE_GAP_TOL_REL = 1e-8


@dataclass(frozen=True, eq=False)
class InputCovariance:
    """Per-correspondence diagonal variance blocks [x, y, z, u, v].

    Units are mm^2 for the coordinate entries and px^2 for the pixel entries;
    the overall covariance is block diagonal across correspondences.
    """

    variances: np.ndarray  # shape (n, 5)

    def __post_init__(self):
        v = np.asarray(self.variances, dtype=float)
        if v.ndim != 2 or v.shape[1] != 5:
            raise ValueError(f"variances must have shape (n, 5), got {v.shape}")
        if np.any(v < 0):
            raise ValueError("variances must be nonnegative")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "variances", v)

    @classmethod
    def isotropic(cls, n: int, sigma_px: float, sigma_mm: float = 0.0) -> "InputCovariance":
        block = np.array([sigma_mm**2] * 3 + [sigma_px**2] * 2)
        return cls(np.tile(block, (n, 1)))

    def full(self) -> np.ndarray:
        """Dense 5n x 5n diagonal matrix."""
        return np.diag(self.variances.reshape(-1))


def _symmetrized(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


@dataclass(frozen=True, eq=False)
class MatrixCovariance:
    """12x12 covariance of the projection parameters (row-major order)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (12, 12):
            raise ValueError(f"matrix covariance must be 12x12, got {m.shape}")
        m = _symmetrized(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def zero(cls) -> "MatrixCovariance":
        return cls(np.zeros((12, 12)))


@dataclass(frozen=True, eq=False)
class PointCovariance:
    """3x3 covariance of the reconstructed point (mm^2)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"point covariance must be 3x3, got {m.shape}")
        m = _symmetrized(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def axis_std(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.matrix), 0.0, None))


def constraint_values(a: np.ndarray, point_xyz, pixel_uv) -> np.ndarray:
    """The two estimation constraints for one correspondence.

    Used as the reference implementation for finite-difference checks of all
    analytic Jacobians below.
    """
    x, y, z = point_xyz
    u, v = pixel_uv
    q = np.array([x, y, z, 1.0])
    return np.array([
        (a[0] - u * a[2]) @ q,
        (a[1] - v * a[2]) @ q,
    ])


def jacobian_wrt_inputs(a: ProjectionMatrix, correspondences) -> np.ndarray:
    """Block-diagonal 2n x 5n Jacobian of the constraints w.r.t. (x, y, z, u, v).

    The constraints are bilinear, so the closed forms are exact:
    d(row_u)/dx = A1 - A9*u and d(row_u)/du = -(A9*x + A10*y + A11*z + A12),
    with the symmetric pattern for the v row.
    """
    m = a.matrix
    n = len(correspondences)
    out = np.zeros((2 * n, 5 * n))
    for i, c in enumerate(correspondences):
        q = c.point.normalize()
        u, v = c.pixel.uv()
        qv = np.array([q.x, q.y, q.z, 1.0])
        depth = float(m[2] @ qv)
        r, col = 2 * i, 5 * i
        out[r, col:col + 3] = m[0, :3] - u * m[2, :3]
        out[r, col + 3] = -depth
        out[r + 1, col:col + 3] = m[1, :3] - v * m[2, :3]
        out[r + 1, col + 4] = -depth
    return out


def jacobian_wrt_params(correspondences) -> np.ndarray:
    """2n x 12 Jacobian of the constraints w.r.t. the projection parameters.

    The constraints are linear in the parameters, so this coincides with the
    design matrix.
    """
    return build_design_matrix(correspondences)


def _row_space_pinv(j_params: np.ndarray) -> np.ndarray:
    """Pseudoinverse of the design matrix restricted to its 11-dim row space."""
    u, s, vt = np.linalg.svd(j_params)
    if (s[10] - s[11]) < GAUGE_GAP_TOL_REL * s[0]:
        raise IllConditioned(
            "gap between 11th and 12th singular values of the parameter Jacobian "
            "is below tolerance; the gauge direction is not separable"
        )
    return (vt[:11].T / s[:11]) @ u[:, :11].T


def propagate_matrix_covariance(
    j_params: np.ndarray,
    j_inputs: np.ndarray,
    input_cov: InputCovariance,
) -> MatrixCovariance:
    """Map input covariance to the 12x12 parameter covariance.

    Solves J_params @ d(params) = -J_inputs @ d(inputs) in the least-squares
    sense with the gauge direction projected out, then forms the sandwich
    product.  Linear in the input covariance.
    """
    pinv = _row_space_pinv(np.asarray(j_params, dtype=float))
    rhs = j_inputs @ input_cov.full() @ j_inputs.T
    return MatrixCovariance(pinv @ rhs @ pinv.T)


def triangulation_jacobians(obs: BiplanarObservation, point_xyz: np.ndarray):
    """Jacobians of the four triangulation constraints at a given point.

    Returns (j_point, j_beta): the 4x3 Jacobian w.r.t. the point and the
    4x28 Jacobian w.r.t. the stacked inputs
    [u1, v1, u2, v2, params(view1), params(view2)].
    """
    n = build_n_matrix(obs)
    j_point = n[:, :3]

    qv = np.append(np.asarray(point_xyz, dtype=float), 1.0)
    u1, v1 = obs.pixel1.uv()
    u2, v2 = obs.pixel2.uv()
    s1 = float(obs.view1.matrix[2] @ qv)
    s2 = float(obs.view2.matrix[2] @ qv)

    j_beta = np.zeros((4, 28))
    j_beta[0, 0] = s1
    j_beta[1, 1] = s1
    j_beta[2, 2] = s2
    j_beta[3, 3] = s2
    # Rows 1-2 depend on view-1 parameters only, rows 3-4 on view-2 only.
    j_beta[0, 4:8] = -qv
    j_beta[0, 12:16] = u1 * qv
    j_beta[1, 8:12] = -qv
    j_beta[1, 12:16] = v1 * qv
    j_beta[2, 16:20] = -qv
    j_beta[2, 24:28] = u2 * qv
    j_beta[3, 20:24] = -qv
    j_beta[3, 24:28] = v2 * qv
    return j_point, j_beta


def propagate_point_covariance(
    obs: BiplanarObservation,
    cov_pixel1: np.ndarray,
    cov_pixel2: np.ndarray,
    cov_view1: MatrixCovariance,
    cov_view2: MatrixCovariance,
) -> PointCovariance:
    """Map pixel and parameter covariance to the 3x3 point covariance.

    The observation is triangulated first (propagating WeakGeometry for
    degenerate ray pairs); all Jacobians are evaluated at that solution.
    """
    result = triangulate(obs)
    j_point, j_beta = triangulation_jacobians(obs, result.point.xyz())

    sigma_beta = np.zeros((28, 28))
    sigma_beta[0:2, 0:2] = np.asarray(cov_pixel1, dtype=float)
    sigma_beta[2:4, 2:4] = np.asarray(cov_pixel2, dtype=float)
    sigma_beta[4:16, 4:16] = cov_view1.matrix
    sigma_beta[16:28, 16:28] = cov_view2.matrix

    pinv = np.linalg.pinv(j_point)
    mid = j_beta @ sigma_beta @ j_beta.T
    return PointCovariance(pinv @ mid @ pinv.T)


def point_sensitivity(obs: BiplanarObservation) -> np.ndarray:
    """End-to-end first-order map from stacked inputs to the point, 3x28.

    Its singular-value spectrum is how conditioning changes under biased
    geometry are measured.
    """
    result = triangulate(obs)
    j_point, j_beta = triangulation_jacobians(obs, result.point.xyz())
    return np.linalg.pinv(j_point) @ j_beta
