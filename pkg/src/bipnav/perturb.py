"""The two error sources: installation bias and pixel noise, plus the TCP chain.

Installation bias is deterministic: a rigid misalignment of the reference
structure (applied to the control points before imaging) and a second one at
the tool mount (applied inside the execution chain).  Pixel noise is
zero-mean Gaussian, independent per coordinate, per observation and per
view.  The two are sampled independently; any coupling between them emerges
downstream through the estimation operators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dlt import FiducialSet
from .geometry import (
    Pixel2H,
    Point3H,
    RigidTransform,
    SmallAngleSpec,
    exact_transform,
    small_angle_transform,
)

CONVENTIONS = ("forward", "inverse")


@dataclass(frozen=True)
class InstallationBias:
    """Rigid misalignment at the reference structure and at the tool mount.

    ``convention`` selects which side of the nominal-vs-physical mismatch the
    reference bias transform describes: ``forward`` places the physical
    control points at T * q_nominal, ``inverse`` at T^-1 * q_nominal.  The
    resulting error magnitudes are identical for rigid T; only the sign of
    the reconstructed offset differs.
    """

    reference_bias: SmallAngleSpec = SmallAngleSpec()
    mount_bias: SmallAngleSpec = SmallAngleSpec()
    use_small_angle: bool = False
    convention: str = "forward"

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}, got {self.convention!r}")

    def _build(self, spec: SmallAngleSpec) -> RigidTransform:
        return small_angle_transform(spec) if self.use_small_angle else exact_transform(spec)

    def reference_transform(self) -> RigidTransform:
        """Map from nominal control-point coordinates to physical ones."""
        t = self._build(self.reference_bias)
        return t if self.convention == "forward" else t.inverse()

    def mount_transform(self) -> RigidTransform:
        return self._build(self.mount_bias)


@dataclass(frozen=True)
class PixelNoiseModel:
    """Zero-mean Gaussian pixel noise, independent per coordinate."""

    sigma_px: float = 0.0

    def __post_init__(self):
        if self.sigma_px < 0:
            raise ValueError(f"sigma_px must be >= 0, got {self.sigma_px}")


@dataclass(frozen=True)
class ExecutionChain:
    """The two rigid links from the reference frame to the tool center point."""

    l2_from_l1: RigidTransform
    tcp_from_l2: RigidTransform

    @classmethod
    def identity(cls) -> "ExecutionChain":
        return cls(RigidTransform.identity(), RigidTransform.identity())

    def nominal(self) -> RigidTransform:
        """The composed chain without any mount bias."""
        return self.tcp_from_l2.compose(self.l2_from_l1)


def bias_control_points(fiducials: FiducialSet, bias: InstallationBias) -> FiducialSet:
    """Move every control point by the (convention-resolved) reference bias."""
    t = bias.reference_transform()
    return FiducialSet(
        points=tuple(t.apply(p.normalize()) for p in fiducials.points),
        name=fiducials.name,
    )


def add_pixel_noise(pixel: Pixel2H, model: PixelNoiseModel, rng: np.random.Generator) -> Pixel2H:
    """Offset u and v by independent draws from the trial's stream.

    Two standard normals are always consumed so the stream layout does not
    depend on sigma; with sigma = 0 the pixel is returned bit-identical.
    """
    g = rng.standard_normal(2)
    p = pixel.normalize()
    return Pixel2H(p.u + model.sigma_px * g[0], p.v + model.sigma_px * g[1], 1.0)


def map_to_tcp(point: Point3H, chain: ExecutionChain, bias: InstallationBias) -> Point3H:
    """Carry a reconstructed point through mount bias and the execution chain."""
    biased = bias.mount_transform().apply(point.normalize())
    return chain.nominal().apply(biased)
