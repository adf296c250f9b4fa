"""Exception types shared across the estimation pipeline."""


class PipelineError(Exception):
    """Base class for every error raised by this package."""


class DegenerateProjection(PipelineError):
    """Homogeneous scale vanished: the point lies on a view's principal plane."""


class InsufficientCorrespondences(PipelineError):
    """Fewer 3D-2D correspondences than the 12-parameter model needs."""


class DegenerateConfiguration(PipelineError):
    """Control-point layout cannot determine the projection matrix (e.g. coplanar)."""


class RankDeficient(PipelineError):
    """The homogeneous solution is not unique (tied smallest singular values)."""


class PointAtInfinity(PipelineError):
    """Triangulated homogeneous solution has (numerically) zero fourth component."""


class WeakGeometry(PipelineError):
    """The two viewing rays are close to parallel for this point."""


class IllConditioned(PipelineError):
    """Covariance propagation rejected a near-degenerate Jacobian."""


class ConfigInvalid(PipelineError):
    """A scenario configuration cannot be used as given."""


class ParseError(ConfigInvalid):
    """Config file is not syntactically valid."""


class SchemaVersionMismatch(ConfigInvalid):
    """Config file declares a schema version this build does not understand."""


class ValidationError(ConfigInvalid):
    """Config file parsed but violates an invariant; message names the field."""


class EmptySample(PipelineError):
    """A statistic was requested over zero samples."""
