"""Best-arm identification for Gaussian bandits with graph-smooth means."""

from .allocation import (
    AllocationResult,
    allocate,
    characteristic_value,
    lower_bound,
    mirror_ascent_allocation,
    vanilla_allocation,
)
from .core import (
    BanditInstance,
    Laplacian,
    SimplexWeights,
    SmoothnessBudget,
    WeightedGraph,
    best_arm,
    kl_gaussian,
    laplacian_from_graph,
    smoothness,
)
from .errors import AmbiguousBestArm, BracketFailure, SingularSystem, SpectralBAIError
from .oracle import BestResponse, best_response, spectral_best_response_i, vanilla_best_response_i
from .simulator import BatchResult, RunConfig, RunRecord, SweepResult, run_batch, run_once, sweep_R
from .tracking import (
    StoppingDecision,
    TrackerState,
    epsilon_schedule,
    glr_statistic,
    project_simplex_inf,
    sample_rule,
    stopping_rule,
)

__all__ = [
    "AllocationResult",
    "AmbiguousBestArm",
    "BanditInstance",
    "BatchResult",
    "BestResponse",
    "BracketFailure",
    "Laplacian",
    "RunConfig",
    "RunRecord",
    "SimplexWeights",
    "SingularSystem",
    "SmoothnessBudget",
    "SpectralBAIError",
    "StoppingDecision",
    "SweepResult",
    "TrackerState",
    "WeightedGraph",
    "allocate",
    "best_arm",
    "best_response",
    "characteristic_value",
    "epsilon_schedule",
    "glr_statistic",
    "kl_gaussian",
    "laplacian_from_graph",
    "lower_bound",
    "mirror_ascent_allocation",
    "project_simplex_inf",
    "run_batch",
    "run_once",
    "sample_rule",
    "smoothness",
    "spectral_best_response_i",
    "stopping_rule",
    "sweep_R",
    "vanilla_allocation",
    "vanilla_best_response_i",
]
