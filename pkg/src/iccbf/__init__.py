"""Input-constrained safety filtering for chains of integrators.

Square-root barrier cascades turn bound constraints on the state of an
integrator chain into a single affine constraint on the input, chosen so the
certified set stays forward invariant with the bounded input that is actually
available.  The package provides the barrier chains (floor, box, and
halfspace variants), closed-form gain tuning, the pointwise min-norm input
filter, a deterministic closed-loop simulator with pure-Python and compiled
kernels, scenario/trajectory file formats, and an `iccbf` command-line tool.
"""

from .core import (
    DomainError,
    HalfspaceConstraint,
    InputBounds,
    PlantSpec,
    ProblemKind,
    ScenarioError,
    SizeError,
    StateBounds,
    ValidationError,
    ValidationReport,
    Violation,
    validate_plant,
)
from .chains import ChainEval, ChainParams, eval_chain, filter_constraint, in_safe_set
from .box import BoxEval, BoxParams, eval_box_chains, filter_constraints, reparametrize
from .halfspaces import (
    HyperplaneParams,
    HyperplaneSpec,
    eval_hyperplane_chain,
    validate_hyperplane_params,
)
from .stopping import (
    StoppingQuery,
    bang_bang_escape_check,
    min_stopping_distance,
    safe_by_stopping_criterion,
)
from .tuning import TunedParams, TuningInputs, tune, tune_n1, tune_n2, tune_n3, validate_params
from .qp import FilterProblem, FilterSolution, SolveStatus, feasibility_margin, kkt_residual, solve_ball, solve_scalar
from .sim import (
    AdversarialNominal,
    BoxSetup,
    ConstantNominal,
    FloorSetup,
    HalfspacesSetup,
    Integrator,
    LogSummary,
    PiecewiseNominal,
    Scenario,
    SinusoidNominal,
    StepRecord,
    SweepReport,
    TrajectoryLog,
    barrier_layout,
    certify_scenario,
    run,
    step,
    sweep,
    validate_scenario,
)
from .scenario_io import (
    load_scenario,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
    summary_to_dict,
    write_csv,
)
from ._kernels import backend_name, compiled_available

__version__ = "1.0.0"

__all__ = [
    "DomainError",
    "ValidationError",
    "ScenarioError",
    "SizeError",
    "Violation",
    "ValidationReport",
    "ProblemKind",
    "PlantSpec",
    "InputBounds",
    "StateBounds",
    "HalfspaceConstraint",
    "validate_plant",
    "ChainParams",
    "ChainEval",
    "eval_chain",
    "in_safe_set",
    "filter_constraint",
    "BoxParams",
    "BoxEval",
    "reparametrize",
    "eval_box_chains",
    "filter_constraints",
    "HyperplaneSpec",
    "HyperplaneParams",
    "eval_hyperplane_chain",
    "validate_hyperplane_params",
    "StoppingQuery",
    "min_stopping_distance",
    "safe_by_stopping_criterion",
    "bang_bang_escape_check",
    "TuningInputs",
    "TunedParams",
    "tune",
    "tune_n1",
    "tune_n2",
    "tune_n3",
    "validate_params",
    "FilterProblem",
    "FilterSolution",
    "SolveStatus",
    "solve_scalar",
    "solve_ball",
    "feasibility_margin",
    "kkt_residual",
    "Integrator",
    "ConstantNominal",
    "SinusoidNominal",
    "PiecewiseNominal",
    "AdversarialNominal",
    "FloorSetup",
    "BoxSetup",
    "HalfspacesSetup",
    "Scenario",
    "StepRecord",
    "LogSummary",
    "TrajectoryLog",
    "SweepReport",
    "validate_scenario",
    "certify_scenario",
    "barrier_layout",
    "step",
    "run",
    "sweep",
    "load_scenario",
    "save_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
    "write_csv",
    "summary_to_dict",
    "backend_name",
    "compiled_available",
    "__version__",
]
