"""Bearings-only target motion analysis with orthogonal-polynomial trajectories."""
from .errors import (
    ConfigError,
    DegenerateGeometryError,
    DomainError,
    InsufficientDataError,
    ShapeError,
    TMAError,
    UnobservableGeometryError,
)
from .estimators import (
    EstimatorConfig,
    TrajectoryEstimate,
    estimate,
    estimate_n_bearings,
    predict,
    refine_gauss_newton,
    solve_pseudolinear,
)
from .evaluation import compare_table, run_monte_carlo, score_run
from . import kernels
from .kinematics import Scenario, WorldPoint, WorldVector, sample_times
from .polybasis import BasisKind, PolyBasis
from .sensing import ObservationSeries, observe

__version__ = "0.1.0"
