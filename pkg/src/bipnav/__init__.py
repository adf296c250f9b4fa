"""Error propagation and tail-risk simulation for biplanar reference-based navigation.

The pipeline under study: a reference structure with known fiducial geometry
is imaged from two views, the per-view projection matrices are estimated by
homogeneous least squares, a target point is reconstructed by two-view
triangulation, and the result is mapped through a rigid chain to the tool
frame.  The package injects installation bias and pixel noise into that
chain and characterizes the resulting error analytically (first-order
covariance propagation) and statistically (seeded Monte Carlo with tail-risk
summaries).
"""

from .dlt import (
    Correspondence,
    FiducialSet,
    build_design_matrix,
    estimate_projection,
    make_correspondences,
    reprojection_error,
)
from .engine import (
    BatchResult,
    TrialFailure,
    TrialOutcome,
    run_batch,
    run_trial,
    trial_stream,
)
from .errors import (
    ConfigInvalid,
    DegenerateConfiguration,
    DegenerateProjection,
    EmptySample,
    IllConditioned,
    InsufficientCorrespondences,
    ParseError,
    PipelineError,
    PointAtInfinity,
    RankDeficient,
    SchemaVersionMismatch,
    ValidationError,
    WeakGeometry,
)
from .geometry import (
    Pixel2H,
    Point3H,
    ProjectionMatrix,
    RigidTransform,
    SmallAngleSpec,
    exact_transform,
    project,
    small_angle_transform,
)
from .perturb import (
    ExecutionChain,
    InstallationBias,
    PixelNoiseModel,
    add_pixel_noise,
    bias_control_points,
    map_to_tcp,
)
from .propagate import (
    InputCovariance,
    MatrixCovariance,
    PointCovariance,
    jacobian_wrt_inputs,
    jacobian_wrt_params,
    propagate_matrix_covariance,
    propagate_point_covariance,
)
from .scenario import (
    MISALIGNMENT_LEVELS,
    ScenarioConfig,
    default_config,
    dump_config,
    parse_config,
)
from .stats import AxisStats, ErrorStats, axis_stats, compare_analytic_mc, summarize
from .studies import (
    analytic_prediction,
    emit_results,
    sim1_rotation,
    sim1_translation,
    sim2_coupled_grid,
    sim3_analytic_vs_mc,
)
from .triangulate import (
    BiplanarObservation,
    TriangulationResult,
    build_n_matrix,
    triangulate,
)

__version__ = "0.1.0"
