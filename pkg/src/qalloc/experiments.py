"""Parameter sweeps and policy comparisons over the stochastic model.

Each sweep varies one quantity of the demand scenario (the idle scenario is
never touched), re-solves exactly, and records the full cost breakdown.
Solved points are cross-checked against the exhaustive oracle whenever the
instance is small enough.  All outputs (CSV and SVG) are deterministic:
rerunning a sweep reproduces byte-identical files.
"""

from __future__ import annotations

import dataclasses
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .baselines import score_policies
from .engine import solve
from .formulation import build_extensive_form
from .model import (
    MAX_DEMAND_QUBITS,
    OnDemandOffer,
    ProblemInstance,
    QallocError,
    format_exact,
    parse_exact,
    validate_instance,
)

#: Sweepable quantities, one row in Figs. order: task demand, scenario power,
#: link fidelity, on-demand price, demand probability.
AXES = ("demand_qubits", "power", "fidelity", "ondemand_cost", "probability")

#: The policy-comparison experiment re-prices on-demand capacity by a
#: multiplier instead of an absolute value.
COMPARISON_AXIS = "ondemand_cost_comparison"

DEFAULT_GRIDS: dict[str, tuple] = {
    "demand_qubits": tuple(range(6, 12)),
    "power": (96, 112, 127, 160, 192, 257),
    "fidelity": tuple(Fraction(i, 10) for i in range(11)),
    "ondemand_cost": (5000, 12500, 25000, 50000, 75000),
    "probability": tuple(Fraction(i, 10) for i in range(11)),
}

DEFAULT_MULTIPLIERS = (
    Fraction(1, 5),
    Fraction(1, 2),
    Fraction(1),
    Fraction(2),
    Fraction(3),
)

#: Seeds scored by the shipped comparison experiment.
DEFAULT_COMPARISON_SEEDS = tuple(range(100))

#: Oracle cross-check runs automatically up to this many machines.
ORACLE_LIMIT = 12

#: Short artifact labels (fig_<label>.csv / fig_<label>.svg).
AXIS_LABELS = {
    "demand_qubits": "demand",
    "power": "power",
    "fidelity": "fidelity",
    "ondemand_cost": "ondemand_cost",
    "probability": "probability",
}

SWEEP_COLUMNS = (
    "axis",
    "axis_value",
    "deployment_cost",
    "expected_compute",
    "expected_bell",
    "expected_ondemand",
    "total",
    "deployed_count",
    "ondemand_expected",
    "solver",
    "nodes",
    "oracle_total",
)

COMPARISON_COLUMNS = (
    "multiplier",
    "model",
    "seed",
    "deployment_count",
    "on_demand_expected",
    "total_cost",
    "feasible",
)


class AxisDomainError(QallocError):
    """Axis value outside the quantity's admissible range."""


class SolverMismatch(QallocError):
    """Branch and bound disagreed with the exhaustive oracle."""


def _uniform(count: int, off_diagonal, diagonal):
    return tuple(
        tuple(diagonal if i == j else off_diagonal for j in range(count))
        for i in range(count)
    )


def check_axis_value(axis: str, value):
    """Normalize and range-check one axis value; AxisDomainError outside the
    axis domain (fidelity/probability in [0, 1], integers >= 0 elsewhere)."""
    if axis == "demand_qubits":
        value = int(value)
        if not 0 <= value <= MAX_DEMAND_QUBITS:
            raise AxisDomainError(
                f"demand must be between 0 and {MAX_DEMAND_QUBITS} qubits, got {value}"
            )
        return value
    if axis in ("power", "ondemand_cost"):
        value = int(value)
        if value < 0:
            raise AxisDomainError(f"{axis} must be >= 0, got {value}")
        return value
    if axis in ("fidelity", "probability"):
        value = value if isinstance(value, Fraction) else parse_exact(str(value))
        if not 0 <= value <= 1:
            raise AxisDomainError(f"{axis} must lie in [0, 1], got {format_exact(value)}")
        return value
    if axis == COMPARISON_AXIS:
        value = value if isinstance(value, Fraction) else parse_exact(str(value))
        if value < 0:
            raise AxisDomainError(f"multiplier must be >= 0, got {format_exact(value)}")
        return value
    raise AxisDomainError(f"unknown axis {axis!r}, expected one of {AXES + (COMPARISON_AXIS,)}")


def apply_axis(base: ProblemInstance, axis: str, value) -> ProblemInstance:
    """New instance with one swept quantity replaced.

    The demand, power, and fidelity axes rewrite the first scenario
    uniformly; the probability axis sets the first scenario's probability
    and gives the complement to the second; the on-demand cost axis sets
    every offer's price.  No axis ever modifies the second scenario.
    """
    if axis not in AXES:
        raise AxisDomainError(f"unknown axis {axis!r}, expected one of {AXES}")
    if not base.scenarios:
        raise AxisDomainError("instance has no scenarios to sweep")
    value = check_axis_value(axis, value)
    count = base.machine_count
    busy = base.scenarios[0]
    if axis == "demand_qubits":
        busy = dataclasses.replace(busy, demand_qubits=value)
        scenarios = (busy,) + base.scenarios[1:]
    elif axis == "power":
        busy = dataclasses.replace(busy, power=(value,) * count)
        scenarios = (busy,) + base.scenarios[1:]
    elif axis == "fidelity":
        busy = dataclasses.replace(busy, fidelity=_uniform(count, value, Fraction(0)))
        scenarios = (busy,) + base.scenarios[1:]
    elif axis == "probability":
        if len(base.scenarios) != 2:
            raise AxisDomainError("probability axis requires exactly two scenarios")
        busy = dataclasses.replace(busy, probability=value)
        idle = dataclasses.replace(base.scenarios[1], probability=1 - value)
        scenarios = (busy, idle)
    else:  # ondemand_cost
        offers = tuple(
            OnDemandOffer(id=o.id, capacity=o.capacity, cost=value) for o in base.offers
        )
        return validate_instance(dataclasses.replace(base, offers=offers))
    return validate_instance(dataclasses.replace(base, scenarios=scenarios))


@dataclass(frozen=True)
class SweepSpec:
    """One experiment: an axis, its values, the base instance, and (for the
    comparison experiment only) the random-policy seeds."""

    axis: str
    values: tuple
    base: ProblemInstance
    seeds: tuple[int, ...] = ()

    def __post_init__(self):
        if self.axis not in AXES + (COMPARISON_AXIS,):
            raise AxisDomainError(
                f"unknown axis {self.axis!r}, expected one of {AXES + (COMPARISON_AXIS,)}"
            )
        values = tuple(check_axis_value(self.axis, v) for v in self.values)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "seeds", tuple(self.seeds))


def default_spec(
    base: ProblemInstance, axis: str, seeds: Sequence[int] | None = None
) -> SweepSpec:
    """SweepSpec on the shipped grid for one axis."""
    if axis == COMPARISON_AXIS:
        return SweepSpec(
            axis=axis,
            values=DEFAULT_MULTIPLIERS,
            base=base,
            seeds=DEFAULT_COMPARISON_SEEDS if seeds is None else tuple(seeds),
        )
    if axis not in DEFAULT_GRIDS:
        raise AxisDomainError(f"no default grid for axis {axis!r}")
    return SweepSpec(axis=axis, values=DEFAULT_GRIDS[axis], base=base)


@dataclass(frozen=True)
class SweepRow:
    axis: str
    axis_value: int | Fraction
    deployment_cost: int | None
    expected_compute: Fraction | None
    expected_bell: Fraction | None
    expected_ondemand: Fraction | None
    total: Fraction | None
    deployed_count: int
    ondemand_expected: Fraction | None
    solver: str
    nodes: int
    oracle_total: Fraction | None
    feasible: bool = True


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, Fraction)):
        return format_exact(value)
    return str(value)


def _expected_od_count(problem, solution) -> Fraction:
    total = Fraction(0)
    for scen, rec in zip(problem.scenarios, solution.recourse):
        total += scen.probability * sum(rec.on_demand)
    return total


def _sweep_point(payload) -> SweepRow:
    base, axis, value, solver, oracle = payload
    point = apply_axis(base, axis, value)
    problem = build_extensive_form(point)
    report = solve(problem, solver)
    oracle_total = None
    if oracle:
        check = solve(problem, "exhaustive")
        if check.solution != report.solution:
            raise SolverMismatch(
                f"{axis}={format_exact(value)}: {report.solver_id} disagrees "
                "with the exhaustive oracle"
            )
        if check.solution.status == "optimal":
            oracle_total = check.solution.cost.total
    sol = report.solution
    if sol.status != "optimal":
        return SweepRow(
            axis=axis,
            axis_value=value,
            deployment_cost=None,
            expected_compute=None,
            expected_bell=None,
            expected_ondemand=None,
            total=None,
            deployed_count=0,
            ondemand_expected=None,
            solver=report.solver_id,
            nodes=report.nodes_explored,
            oracle_total=oracle_total,
            feasible=False,
        )
    return SweepRow(
        axis=axis,
        axis_value=value,
        deployment_cost=sol.cost.deployment,
        expected_compute=sol.cost.expected_compute,
        expected_bell=sol.cost.expected_bell,
        expected_ondemand=sol.cost.expected_on_demand,
        total=sol.cost.total,
        deployed_count=sol.first_stage.count,
        ondemand_expected=_expected_od_count(problem, sol),
        solver=report.solver_id,
        nodes=report.nodes_explored,
        oracle_total=oracle_total,
    )


def run_sweep(
    spec: SweepSpec,
    solver: str = "branch_and_bound",
    oracle: bool | None = None,
    threads: int = 1,
) -> tuple[SweepRow, ...]:
    """Solve the instance at every axis value; rows ordered by axis value.

    ``oracle=None`` enables the exhaustive cross-check automatically for
    instances of up to ORACLE_LIMIT machines.  ``threads`` > 1 distributes
    points over a process pool; results are identical either way.
    """
    if spec.axis == COMPARISON_AXIS:
        raise AxisDomainError("use run_comparison for the comparison experiment")
    if oracle is None:
        oracle = spec.base.machine_count <= ORACLE_LIMIT
    payloads = [
        (spec.base, spec.axis, value, solver, oracle) for value in sorted(spec.values)
    ]
    if threads > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return tuple(pool.map(_sweep_point, payloads))
    return tuple(_sweep_point(p) for p in payloads)


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    lines = [",".join(SWEEP_COLUMNS)]
    for row in rows:
        lines.append(
            ",".join(
                _cell(v)
                for v in (
                    row.axis,
                    row.axis_value,
                    row.deployment_cost,
                    row.expected_compute,
                    row.expected_bell,
                    row.expected_ondemand,
                    row.total,
                    row.deployed_count,
                    row.ondemand_expected,
                    row.solver,
                    row.nodes,
                    row.oracle_total,
                )
            )
        )
    return "\n".join(lines) + "\n"


def sweep_to_json(rows: Sequence[SweepRow]) -> str:
    docs = []
    for row in rows:
        docs.append(
            {
                key: _cell(getattr(row, attr))
                for key, attr in zip(
                    SWEEP_COLUMNS,
                    (
                        "axis",
                        "axis_value",
                        "deployment_cost",
                        "expected_compute",
                        "expected_bell",
                        "expected_ondemand",
                        "total",
                        "deployed_count",
                        "ondemand_expected",
                        "solver",
                        "nodes",
                        "oracle_total",
                    ),
                )
            }
        )
    return json.dumps(docs, indent=2) + "\n"


@dataclass(frozen=True)
class ComparisonRow:
    """One scored policy at one on-demand price multiplier.

    The random model appears as a single mean row over the spec's seeds;
    ``feasible_count``/``seed_count`` report how many seeds entered the
    mean (infeasible draws are excluded from it).
    """

    multiplier: Fraction
    model: str  # "proposed" | "evf" | "random_mean"
    seed: int | None
    deployment_count: int | Fraction
    on_demand_expected: Fraction | None
    total_cost: Fraction | None
    feasible: bool
    feasible_count: int | None = None
    seed_count: int | None = None


def run_comparison(spec: SweepSpec, evf_mode: str = "bits") -> tuple[ComparisonRow, ...]:
    """Score the exact solver, the expected-value policy, and the random
    policy (mean over the spec's seeds) while re-pricing on-demand capacity.

    Spec values are multipliers applied to each offer's cost; the scaled
    cost must stay integral.
    """
    if spec.axis != COMPARISON_AXIS:
        raise AxisDomainError(f"comparison requires axis {COMPARISON_AXIS!r}")
    rows: list[ComparisonRow] = []
    for raw in spec.values:
        mult = raw if isinstance(raw, Fraction) else parse_exact(str(raw))
        if mult < 0:
            raise AxisDomainError(f"multiplier must be >= 0, got {format_exact(mult)}")
        offers = []
        for o in spec.base.offers:
            scaled = mult * o.cost
            if scaled.denominator != 1:
                raise AxisDomainError(
                    f"multiplier {format_exact(mult)} makes offer {o.id} cost non-integral"
                )
            offers.append(OnDemandOffer(id=o.id, capacity=o.capacity, cost=int(scaled)))
        point = validate_instance(dataclasses.replace(spec.base, offers=tuple(offers)))
        for s in score_policies(point, spec.seeds, evf_mode=evf_mode):
            if s.model == "random":
                continue  # the CSV keeps the aggregate; per-seed rows stay in the API
            rows.append(
                ComparisonRow(
                    multiplier=mult,
                    model=s.model,
                    seed=s.seed,
                    deployment_count=s.deployment_count,
                    on_demand_expected=s.on_demand_expected,
                    total_cost=s.total_cost,
                    feasible=s.feasible,
                    feasible_count=s.feasible_count,
                    seed_count=s.seed_count,
                )
            )
    return tuple(rows)


def _feasible_cell(row: ComparisonRow) -> str:
    if row.seed_count is None:
        return "true" if row.feasible else "false"
    return f"{row.feasible_count}/{row.seed_count}"


def comparison_to_csv(rows: Sequence[ComparisonRow]) -> str:
    lines = [",".join(COMPARISON_COLUMNS)]
    for row in rows:
        lines.append(
            ",".join(
                (
                    _cell(row.multiplier),
                    row.model,
                    _cell(row.seed),
                    _cell(row.deployment_count),
                    _cell(row.on_demand_expected),
                    _cell(row.total_cost),
                    _feasible_cell(row),
                )
            )
        )
    return "\n".join(lines) + "\n"


def comparison_to_json(rows: Sequence[ComparisonRow]) -> str:
    docs = []
    for row in rows:
        docs.append(
            {
                "multiplier": _cell(row.multiplier),
                "model": row.model,
                "seed": _cell(row.seed),
                "deployment_count": _cell(row.deployment_count),
                "on_demand_expected": _cell(row.on_demand_expected),
                "total_cost": _cell(row.total_cost),
                "feasible": _feasible_cell(row),
            }
        )
    return json.dumps(docs, indent=2) + "\n"


def render_charts(rows: Sequence) -> dict[str, str]:
    """Artifact documents (CSV and SVG) for one experiment's rows.

    Sweep rows yield fig_<axis>.csv and fig_<axis>.svg (the power sweep adds
    a first-stage/second-stage structure view); comparison rows yield
    fig_comparison.csv and fig_comparison.svg.
    """
    from . import charts

    if not rows:
        raise ValueError("no rows to render")
    if isinstance(rows[0], ComparisonRow):
        return {
            "fig_comparison.csv": comparison_to_csv(rows),
            "fig_comparison.svg": charts.comparison_chart(rows),
        }
    axis = rows[0].axis
    label = AXIS_LABELS.get(axis, axis)
    docs = {
        f"fig_{label}.csv": sweep_to_csv(rows),
        f"fig_{label}.svg": charts.sweep_chart(rows),
    }
    if axis == "power":
        docs["fig_power_structure.svg"] = charts.structure_chart(rows)
    return docs


def write_text(path: str, text: str) -> None:
    """Atomic write: temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_all(
    instance: ProblemInstance,
    out_dir: str,
    solver: str = "branch_and_bound",
    threads: int = 1,
    seeds: Sequence[int] | None = None,
) -> dict[str, str]:
    """Run all six shipped experiments and write their artifacts.

    Five sweeps (demand, power, fidelity, on-demand cost, probability) plus
    the policy comparison.  Returns artifact name -> path.  Outputs are
    stable: a second run writes byte-identical files.
    """
    written: dict[str, str] = {}

    def emit(docs: dict[str, str]) -> None:
        for name, text in docs.items():
            path = os.path.join(out_dir, name)
            write_text(path, text)
            written[name] = path

    for axis in AXES:
        rows = run_sweep(default_spec(instance, axis), solver=solver, threads=threads)
        emit(render_charts(rows))
    comparison = run_comparison(default_spec(instance, COMPARISON_AXIS, seeds=seeds))
    emit(render_charts(comparison))
    return written
