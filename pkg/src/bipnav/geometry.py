"""Homogeneous points, rigid transforms, and the linear pinhole projection.

Conventions used throughout the package:

* 3D coordinates are millimetres, pixel coordinates are pixels.
* Angles are radians everywhere inside the library; degrees appear only at
  the config/CLI boundary.
* A rigid transform is a 4x4 homogeneous matrix with bottom row [0 0 0 1]
  acting on column vectors: ``T.apply(q)`` maps the point q.
* A projection matrix is the 3x4 linear pinhole map from homogeneous 3D
  points to homogeneous pixels.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateProjection

# First-order rotation entries drift from the exact ones at O(angle^2);
# past this threshold the approximation is dubious but still allowed.
SMALL_ANGLE_WARN_RAD = 0.1

_DEGENERATE_SCALE = 1e-12


class SmallAngleApproximationWarning(UserWarning):
    """Angles large enough that the first-order transform visibly drifts."""


@dataclass(frozen=True)
class Point3H:
    """Homogeneous 3D point (mm); ``w`` is the projective scale."""

    x: float
    y: float
    z: float
    w: float = 1.0

    def normalize(self) -> "Point3H":
        """Scale so that w == 1 exactly."""
        if self.w == 0:
            raise ValueError("cannot normalize a point with w = 0")
        if self.w == 1.0:
            return self
        return Point3H(self.x / self.w, self.y / self.w, self.z / self.w, 1.0)

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.w], dtype=float)

    def xyz(self) -> np.ndarray:
        """Cartesian coordinates of the normalized point."""
        p = self.normalize()
        return np.array([p.x, p.y, p.z], dtype=float)

    @classmethod
    def from_array(cls, v) -> "Point3H":
        v = np.asarray(v, dtype=float)
        if v.shape == (3,):
            return cls(v[0], v[1], v[2], 1.0)
        if v.shape == (4,):
            return cls(v[0], v[1], v[2], v[3])
        raise ValueError(f"expected length-3 or length-4 vector, got shape {v.shape}")


@dataclass(frozen=True)
class Pixel2H:
    """Homogeneous 2D image point (px); ``w`` is the projective scale."""

    u: float
    v: float
    w: float = 1.0

    def normalize(self) -> "Pixel2H":
        if self.w == 0:
            raise ValueError("cannot normalize a pixel with w = 0")
        if self.w == 1.0:
            return self
        return Pixel2H(self.u / self.w, self.v / self.w, 1.0)

    def to_array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.w], dtype=float)

    def uv(self) -> np.ndarray:
        p = self.normalize()
        return np.array([p.u, p.v], dtype=float)


@dataclass(frozen=True)
class SmallAngleSpec:
    """Rotation angles (rad) about x/y/z plus a translation offset (mm)."""

    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    dx: float = 0.0
    dy: float = 0.0
    dz: float = 0.0

    def __post_init__(self):
        worst = max(abs(self.alpha), abs(self.beta), abs(self.gamma))
        if worst > SMALL_ANGLE_WARN_RAD:
            warnings.warn(
                f"rotation angle {worst:.3g} rad exceeds {SMALL_ANGLE_WARN_RAD} rad; "
                "the first-order form degrades quadratically",
                SmallAngleApproximationWarning,
                stacklevel=3,
            )

    @property
    def is_zero(self) -> bool:
        return not any((self.alpha, self.beta, self.gamma, self.dx, self.dy, self.dz))


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """4x4 homogeneous map; rotation block plus translation, bottom row pinned."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (4, 4):
            raise ValueError(f"transform matrix must be 4x4, got {m.shape}")
        if not np.allclose(m[3], [0.0, 0.0, 0.0, 1.0], atol=1e-12):
            raise ValueError("bottom row of a homogeneous transform must be [0 0 0 1]")
        m = m.copy()
        m[3] = [0.0, 0.0, 0.0, 1.0]
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(4))

    @classmethod
    def from_rotation_translation(cls, rotation, translation) -> "RigidTransform":
        m = np.eye(4)
        m[:3, :3] = np.asarray(rotation, dtype=float)
        m[:3, 3] = np.asarray(translation, dtype=float)
        return cls(m)

    @property
    def rotation(self) -> np.ndarray:
        return self.matrix[:3, :3]

    @property
    def translation(self) -> np.ndarray:
        return self.matrix[:3, 3]

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """self after other: (self.compose(other)).apply(q) == self.apply(other.apply(q))."""
        return RigidTransform(self.matrix @ other.matrix)

    def inverse(self) -> "RigidTransform":
        # Affine closed form; valid for small-angle matrices too, where the
        # rotation block is not orthogonal.
        r_inv = np.linalg.inv(self.matrix[:3, :3])
        m = np.eye(4)
        m[:3, :3] = r_inv
        m[:3, 3] = -r_inv @ self.matrix[:3, 3]
        return RigidTransform(m)

    def apply(self, point: Point3H) -> Point3H:
        v = self.matrix @ point.to_array()
        return Point3H(v[0], v[1], v[2], v[3]).normalize()

    def apply_xyz(self, xyz: np.ndarray) -> np.ndarray:
        """Apply to cartesian coordinates, shape (3,) or (n, 3)."""
        xyz = np.asarray(xyz, dtype=float)
        return xyz @ self.matrix[:3, :3].T + self.matrix[:3, 3]

    def rotation_orthogonality_defect(self) -> float:
        r = self.matrix[:3, :3]
        return float(np.linalg.norm(r.T @ r - np.eye(3)))


@dataclass(frozen=True, eq=False)
class ProjectionMatrix:
    """3x4 pinhole map with 12 free parameters, defined up to scale."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 4):
            raise ValueError(f"projection matrix must be 3x4, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("projection matrix entries must be finite")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def min_sv_ratio(self) -> float:
        """Smallest over largest singular value; rank-3 check uses > 1e-8."""
        s = np.linalg.svd(self.matrix, compute_uv=False)
        return float(s[-1] / s[0])

    def normalized(self, anchor: Point3H | None = None) -> "ProjectionMatrix":
        """Canonical gauge: unit Frobenius norm, positive depth at ``anchor``.

        The pinhole map is defined only up to a nonzero scale; fixing the
        norm and the sign of the homogeneous scale at a reference point makes
        matrices directly comparable.
        """
        m = self.matrix / np.linalg.norm(self.matrix)
        a = anchor.normalize().to_array() if anchor is not None else np.array([0.0, 0.0, 0.0, 1.0])
        if float(m[2] @ a) < 0.0:
            m = -m
        return ProjectionMatrix(m)

    def params(self) -> np.ndarray:
        """The 12 parameters in row-major order."""
        return self.matrix.reshape(-1).copy()


def rotation_x(angle: float) -> RigidTransform:
    c, s = math.cos(angle), math.sin(angle)
    return RigidTransform(np.array([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, c, -s, 0.0],
        [0.0, s, c, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]))


def rotation_y(angle: float) -> RigidTransform:
    c, s = math.cos(angle), math.sin(angle)
    return RigidTransform(np.array([
        [c, 0.0, s, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [-s, 0.0, c, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]))


def rotation_z(angle: float) -> RigidTransform:
    c, s = math.cos(angle), math.sin(angle)
    return RigidTransform(np.array([
        [c, -s, 0.0, 0.0],
        [s, c, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]))


def translation(dx: float, dy: float, dz: float) -> RigidTransform:
    m = np.eye(4)
    m[:3, 3] = [dx, dy, dz]
    return RigidTransform(m)


def small_angle_transform(spec: SmallAngleSpec) -> RigidTransform:
    """First-order perturbation matrix: cos -> 1, sin -> angle, cross terms dropped."""
    return RigidTransform(np.array([
        [1.0, -spec.gamma, spec.beta, spec.dx],
        [spec.gamma, 1.0, -spec.alpha, spec.dy],
        [-spec.beta, spec.alpha, 1.0, spec.dz],
        [0.0, 0.0, 0.0, 1.0],
    ]))


def exact_transform(spec: SmallAngleSpec) -> RigidTransform:
    """Exact trigonometric form of the same perturbation.

    Composition order is translation * Rx * Ry * Rz, matching the order the
    first-order form linearizes; other orders differ at second order only.
    """
    t = translation(spec.dx, spec.dy, spec.dz)
    return t.compose(rotation_x(spec.alpha)).compose(rotation_y(spec.beta)).compose(rotation_z(spec.gamma))


def project(a: ProjectionMatrix, point: Point3H) -> Pixel2H:
    """Apply the pinhole map; raises DegenerateProjection when the scale vanishes."""
    v = a.matrix @ point.to_array()
    if abs(v[2]) < _DEGENERATE_SCALE:
        raise DegenerateProjection(
            f"homogeneous scale {v[2]:.3e} below {_DEGENERATE_SCALE:g}; "
            "point lies on the view's principal plane"
        )
    return Pixel2H(v[0], v[1], v[2])
