"""Placement of replicated applications onto identical nodes under capacity
and affinity limits: solver families, bounds, an exact oracle, an instance
generator, and a benchmark harness."""

from ._backend import DEFAULT_BACKEND, available_backends
from .algorithms import AlgoConfig, parse_algorithm, solve
from .bounds import (
    Bound,
    OracleLimitError,
    brute_force_opt,
    check_assignment_against_model,
    export_ilp,
    lower_bound,
)
from .generator import GenProfile, TemporalShape, default_profile, gen_instance
from .measures import MeasureKind, app_size, node_residual_measure, parse_measure
from .model import (
    AffinityGraph,
    Application,
    Instance,
    NormalizedView,
    Solution,
    load_instance,
    load_solution,
    max_replicas_per_node,
    normalize,
    read_csv_instance,
    save_instance,
    save_solution,
    validate,
)
from .placement import PlacementState, verify_solution
from .scores import ScoreKind, parse_score, score

__version__ = "0.1.0"

__all__ = [
    "AffinityGraph", "AlgoConfig", "Application", "Bound", "DEFAULT_BACKEND",
    "GenProfile", "Instance", "MeasureKind", "NormalizedView",
    "OracleLimitError", "PlacementState", "ScoreKind", "Solution",
    "TemporalShape", "app_size", "available_backends", "brute_force_opt",
    "check_assignment_against_model", "default_profile", "export_ilp",
    "gen_instance", "load_instance", "load_solution", "lower_bound",
    "max_replicas_per_node", "node_residual_measure", "normalize",
    "parse_algorithm", "parse_measure", "parse_score", "read_csv_instance",
    "save_instance", "save_solution", "score", "solve", "validate",
    "verify_solution", "__version__",
]
