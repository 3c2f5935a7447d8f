"""Exact provisioning planner for distributed quantum computing.

Reserve quantum computers before random demand, machine power, and link
fidelity are revealed, react with machine usage and on-demand rentals once
they are, and do both provably cost-optimally.  Costs are exact rationals;
two independent exact solvers (exhaustive and branch and bound) agree on
every instance, ties broken canonically.
"""

from .baselines import (
    AveragedParameters,
    EvfInfeasible,
    PolicyScore,
    average_parameters,
    evf_first_stage,
    random_first_stage,
    score_policies,
    scores_to_csv,
)
from .engine import (
    InstanceTooLarge,
    SearchNode,
    SolverReport,
    branch_and_bound,
    evaluate_policy,
    exhaustive_solve,
    lower_bound,
    policy_solution,
    recourse_solve,
    solve,
    solution_to_dict,
    verify_solution,
)
from .experiments import (
    AXES,
    AxisDomainError,
    COMPARISON_AXIS,
    ComparisonRow,
    SolverMismatch,
    SweepRow,
    SweepSpec,
    apply_axis,
    comparison_to_csv,
    comparison_to_json,
    default_spec,
    render_charts,
    run_all,
    run_comparison,
    run_sweep,
    sweep_to_csv,
    sweep_to_json,
)
from .formulation import (
    CompiledProblem,
    CompiledScenario,
    ConflictGraph,
    build_deterministic,
    build_extensive_form,
    build_single_stage,
    canonical_text,
    compile_conflicts,
    pair_product_envelope,
)
from .model import (
    CostBreakdown,
    DemandTooLarge,
    ExactNumber,
    FirstStageDecision,
    InvalidInstanceError,
    LinkTable,
    OnDemandOffer,
    ProblemInstance,
    QallocError,
    QuantumComputer,
    Scenario,
    ScenarioRecourse,
    Solution,
    ValidationIssue,
    default_instance,
    demand_bits,
    format_exact,
    instance_from_json,
    instance_to_json,
    parse_exact,
    validate_instance,
)

__version__ = "0.1.0"


def __getattr__(name):
    # Imported lazily so `python -m qalloc.cli` does not re-import the
    # module it is executing.
    if name == "emit_default_instance":
        from .cli import emit_default_instance

        return emit_default_instance
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = [
    "AXES",
    "AveragedParameters",
    "AxisDomainError",
    "COMPARISON_AXIS",
    "ComparisonRow",
    "CompiledProblem",
    "CompiledScenario",
    "ConflictGraph",
    "CostBreakdown",
    "DemandTooLarge",
    "EvfInfeasible",
    "ExactNumber",
    "FirstStageDecision",
    "InstanceTooLarge",
    "InvalidInstanceError",
    "LinkTable",
    "OnDemandOffer",
    "PolicyScore",
    "ProblemInstance",
    "QallocError",
    "QuantumComputer",
    "Scenario",
    "ScenarioRecourse",
    "SearchNode",
    "Solution",
    "SolverMismatch",
    "SolverReport",
    "SweepRow",
    "SweepSpec",
    "ValidationIssue",
    "apply_axis",
    "average_parameters",
    "branch_and_bound",
    "build_deterministic",
    "build_extensive_form",
    "build_single_stage",
    "canonical_text",
    "compile_conflicts",
    "comparison_to_csv",
    "comparison_to_json",
    "default_instance",
    "default_spec",
    "demand_bits",
    "emit_default_instance",
    "evaluate_policy",
    "evf_first_stage",
    "exhaustive_solve",
    "format_exact",
    "instance_from_json",
    "instance_to_json",
    "lower_bound",
    "pair_product_envelope",
    "parse_exact",
    "policy_solution",
    "random_first_stage",
    "recourse_solve",
    "render_charts",
    "run_all",
    "run_comparison",
    "run_sweep",
    "score_policies",
    "scores_to_csv",
    "solution_to_dict",
    "solve",
    "sweep_to_csv",
    "sweep_to_json",
    "validate_instance",
    "verify_solution",
]
