"""Minimum-curvature raceline optimization and quasi-steady-state lap simulation.

The pipeline: fit a periodic B-spline centerline to surveyed track waypoints,
minimize sampled squared curvature over the spline control points inside the
track corridor (a convex QP), and simulate lap times under a traction-ellipse
model. A batch CLI and a local HTTP service expose the same engine.
"""

from .errors import (
    DegenerateParameterizationError,
    FitError,
    FitToleranceWarning,
    InfeasibleTrackError,
    NoBottleneckError,
    NumericalError,
    ParameterRangeError,
    QpAssemblyError,
    RacelineError,
    TrackValidationError,
    UnsupportedOrderError,
)
from .estimators import LapTimeSimulator, MinimumCurvatureRaceline
from .mincurv import (
    CurvatureWeights,
    OptimizeResult,
    assemble_qp,
    curvature_weights,
    optimize,
    optimize_window,
    sum_sq_curvature,
)
from .qp import QpProblem, QpSolution, solve_qp
from .simulate import (
    LapMetrics,
    TractionEllipse,
    VelocityProfile,
    compare_metrics,
    corner_speed,
    find_bottlenecks,
    lap_metrics,
    qss_profile,
)
from .splines import (
    DiscretizationSet,
    KnotVector,
    SplineTrajectory,
    basis_derivative,
    basis_value,
    chord_parameters,
    clamped_uniform_knots,
    fit_periodic,
    uniform_periodic_knots,
)
from .track import (
    CenterlineModel,
    TrackDefinition,
    boundary_polylines,
    build_centerline,
    load_track,
    parse_track_text,
    track_from_arrays,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "RacelineError",
    "ParameterRangeError",
    "UnsupportedOrderError",
    "DegenerateParameterizationError",
    "FitError",
    "FitToleranceWarning",
    "TrackValidationError",
    "InfeasibleTrackError",
    "QpAssemblyError",
    "NoBottleneckError",
    "NumericalError",
    "KnotVector",
    "SplineTrajectory",
    "DiscretizationSet",
    "basis_value",
    "basis_derivative",
    "uniform_periodic_knots",
    "clamped_uniform_knots",
    "chord_parameters",
    "fit_periodic",
    "TrackDefinition",
    "CenterlineModel",
    "parse_track_text",
    "load_track",
    "track_from_arrays",
    "build_centerline",
    "boundary_polylines",
    "QpProblem",
    "QpSolution",
    "solve_qp",
    "CurvatureWeights",
    "curvature_weights",
    "assemble_qp",
    "optimize",
    "optimize_window",
    "sum_sq_curvature",
    "OptimizeResult",
    "TractionEllipse",
    "VelocityProfile",
    "LapMetrics",
    "corner_speed",
    "find_bottlenecks",
    "qss_profile",
    "lap_metrics",
    "compare_metrics",
    "MinimumCurvatureRaceline",
    "LapTimeSimulator",
]
