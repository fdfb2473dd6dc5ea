"""Distances and barycenters for finite point patterns.

The package computes transport-transform (TT) and relative TT distances
between point patterns on pluggable ground spaces (Euclidean, street
networks) and fits barycenter patterns with an alternating clustering
heuristic backed by an auction assignment solver.
"""

from .assignment import (
    AuctionState,
    CostMatrix,
    default_eps_schedule,
    solve_auction,
    solve_exact,
)
from .barycenter import (
    AlternatingFit,
    BarycenterState,
    FitReport,
    MatchState,
    RestartResult,
    cardinality_upper_bound,
    fit_with_restarts,
    kmeans_bary,
    kmeans_bary_improved,
)
from .core import (
    VIRTUAL,
    EuclideanSpace,
    GroundSpace,
    Params,
    PointPattern,
    UnsupportedConfigError,
    extended_distance,
    is_virtual,
)
from .harness import Scenario, StudyReport, generate_instance, run_study
from .location import euclid_mean_center, network_median_center, weiszfeld_median
from .metrics import (
    DistanceResult,
    ospa_distance,
    rtt_distance,
    spike_time_distance,
    tt_distance,
    tt_distance_bruteforce,
)
from .network import (
    DistanceMatrixView,
    EdgePoint,
    Network,
    NetworkSpace,
    build_distance_matrix,
    project_to_network,
)

__version__ = "0.1.0"

__all__ = [
    "AlternatingFit",
    "AuctionState",
    "BarycenterState",
    "CostMatrix",
    "DistanceMatrixView",
    "DistanceResult",
    "EdgePoint",
    "EuclideanSpace",
    "FitReport",
    "GroundSpace",
    "MatchState",
    "Network",
    "NetworkSpace",
    "Params",
    "PointPattern",
    "RestartResult",
    "Scenario",
    "StudyReport",
    "UnsupportedConfigError",
    "VIRTUAL",
    "build_distance_matrix",
    "cardinality_upper_bound",
    "default_eps_schedule",
    "euclid_mean_center",
    "extended_distance",
    "fit_with_restarts",
    "generate_instance",
    "is_virtual",
    "kmeans_bary",
    "kmeans_bary_improved",
    "network_median_center",
    "ospa_distance",
    "project_to_network",
    "rtt_distance",
    "run_study",
    "solve_auction",
    "solve_exact",
    "spike_time_distance",
    "tt_distance",
    "tt_distance_bruteforce",
    "weiszfeld_median",
]
