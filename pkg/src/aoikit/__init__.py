"""Age-of-information toolkit for a two-source status-update queue.

Three engines over the same model: an exact linear-system solver for the
stationary distribution, mean age, and age MGF; verbatim transcriptions
of the printed closed forms; and an event-driven Monte Carlo simulator.
A validation layer cross-checks all three and reports discrepancies
without correcting them.
"""

from importlib.metadata import PackageNotFoundError, version

from .closedform import (
    EvalPoint,
    printed_mgf,
    printed_mgf_non_preemptive,
    printed_mgf_self_preemptive,
    printed_second_moment,
    printed_state_term,
    stationary_closed_form,
)
from .errors import (
    AoikitError,
    ConditioningError,
    DomainError,
    ModelViolationError,
    ParameterError,
    SolverError,
)
from .model import (
    Policy,
    ShsChain,
    SystemParams,
    build_chain,
)
from .moments import MomentSet, moment_from_mgf, summarize
from .simulate import SimConfig, SimResult, simulate, simulate_replications
from .solver import (
    CorrelationSolution,
    StationaryDist,
    admissible_bound,
    aoi_second_moment,
    average_aoi,
    default_s_grid,
    mgf_at,
    mgf_curve,
    mgf_source2_at,
    solve_first_moment,
    solve_mgf_correlations,
    stationary_distribution,
)
from .validate import ValidationRecord, ValidationReport, run_validation

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree without install
    __version__ = "0.0.0"

__all__ = [
    "AoikitError",
    "ConditioningError",
    "CorrelationSolution",
    "DomainError",
    "EvalPoint",
    "ModelViolationError",
    "MomentSet",
    "ParameterError",
    "Policy",
    "ShsChain",
    "SimConfig",
    "SimResult",
    "SolverError",
    "StationaryDist",
    "SystemParams",
    "ValidationRecord",
    "ValidationReport",
    "admissible_bound",
    "aoi_second_moment",
    "average_aoi",
    "build_chain",
    "default_s_grid",
    "mgf_at",
    "mgf_curve",
    "mgf_source2_at",
    "moment_from_mgf",
    "printed_mgf",
    "printed_mgf_non_preemptive",
    "printed_mgf_self_preemptive",
    "printed_second_moment",
    "printed_state_term",
    "run_validation",
    "simulate",
    "simulate_replications",
    "solve_first_moment",
    "solve_mgf_correlations",
    "stationary_closed_form",
    "stationary_distribution",
    "summarize",
    "__version__",
]
