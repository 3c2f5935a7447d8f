"""Compilation of the two provisioning models into one solvable form.

The min-form link constraints are compiled into a conflict graph (a pair of
machines is forbidden when their link cannot carry the smaller machine's
qubit count), and the quadratic Bell terms are associated with per-pair
product variables whose linear envelope is exact at binary points.  The
stochastic model compiles to its extensive form: one block of usage and
on-demand variables per scenario tied to a shared deployment vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .model import (
    LinkTable,
    OnDemandOffer,
    ProblemInstance,
    demand_bits,
    format_exact,
)

Number = int | Fraction


@dataclass(frozen=True)
class ConflictGraph:
    """Unordered machine pairs that may never be used together."""

    forbidden: frozenset[tuple[int, int]]  # 0-based (i, j) with i < j

    def __post_init__(self):
        object.__setattr__(self, "forbidden", frozenset(self.forbidden))

    def allows(self, indices: Sequence[int]) -> bool:
        chosen = sorted(indices)
        for a in range(len(chosen)):
            for b in range(a + 1, len(chosen)):
                if (chosen[a], chosen[b]) in self.forbidden:
                    return False
        return True


@dataclass(frozen=True)
class CompiledScenario:
    probability: Fraction
    demand_bits: Number
    powers: tuple[Number, ...]
    compute_costs: tuple[int, ...]
    bell_costs: tuple[tuple[int, ...], ...]
    conflicts: ConflictGraph


@dataclass(frozen=True)
class CompiledProblem:
    """Solver-ready form; binary-feasible points map one-to-one onto the
    source model's feasible points at identical cost."""

    deploy_costs: tuple[int, ...]
    scenarios: tuple[CompiledScenario, ...]
    offers: tuple[OnDemandOffer, ...]
    usage_locked: bool  # single-stage model: usage coincides with deployment

    @property
    def machine_count(self) -> int:
        return len(self.deploy_costs)


def compile_conflicts(
    powers: Sequence[Number],
    links: LinkTable,
    fidelity: Sequence[Sequence[Number]],
) -> ConflictGraph:
    """Compile the pairwise link constraints into forbidden pairs.

    Pair {i, j} is forbidden exactly when capacity * fidelity falls short of
    min(power_i, power_j) in either link direction.  A selection of machines
    satisfies every link constraint iff it avoids all forbidden pairs: with
    either machine unused the min is zero and the constraint is vacuous, so
    zero-power machines never conflict.
    """
    count = len(powers)
    forbidden = set()
    for i in range(count):
        for j in range(i + 1, count):
            need = min(powers[i], powers[j])
            if (
                links.capacity[i][j] * fidelity[i][j] < need
                or links.capacity[j][i] * fidelity[j][i] < need
            ):
                forbidden.add((i, j))
    return ConflictGraph(frozenset(forbidden))


def build_single_stage(
    instance: ProblemInstance,
    demand: Number,
    powers: Sequence[Number],
    fidelity: Sequence[Sequence[Number]],
) -> CompiledProblem:
    """Single-stage model over arbitrary (possibly rational) demand and powers.

    Used directly by the expected-value baseline, whose averaged parameters
    are rationals; the usual deterministic build is a wrapper that converts
    a qubit demand to bits.
    """
    scenario = CompiledScenario(
        probability=Fraction(1),
        demand_bits=demand,
        powers=tuple(powers),
        compute_costs=tuple(c.compute_cost for c in instance.computers),
        bell_costs=instance.links.bell_cost,
        conflicts=compile_conflicts(powers, instance.links, fidelity),
    )
    return CompiledProblem(
        deploy_costs=tuple(c.deploy_cost for c in instance.computers),
        scenarios=(scenario,),
        offers=(),
        usage_locked=True,
    )


def build_deterministic(
    instance: ProblemInstance, demand_qubits: int | None
) -> CompiledProblem:
    """Deterministic model on base powers and fidelities.

    Deployment implies usage, there are no on-demand offers, and coverage
    must reach 2**demand_qubits bits (0 when the demand is absent).
    """
    return build_single_stage(
        instance,
        demand=demand_bits(demand_qubits),
        powers=tuple(c.base_qubits for c in instance.computers),
        fidelity=instance.links.base_fidelity,
    )


def build_extensive_form(instance: ProblemInstance) -> CompiledProblem:
    """Extensive form of the two-stage model: one scenario block per
    realization, each with its own conflict graph, tied to shared
    first-stage deployment bits."""
    scenarios = tuple(
        CompiledScenario(
            probability=s.probability,
            demand_bits=s.demand_bits,
            powers=s.power,
            compute_costs=tuple(c.compute_cost for c in instance.computers),
            bell_costs=instance.links.bell_cost,
            conflicts=compile_conflicts(s.power, instance.links, s.fidelity),
        )
        for s in instance.scenarios
    )
    return CompiledProblem(
        deploy_costs=tuple(c.deploy_cost for c in instance.computers),
        scenarios=scenarios,
        offers=instance.offers,
        usage_locked=False,
    )


def pair_product_envelope(left: int, right: int) -> tuple[int, int]:
    """Bounds the linear envelope admits for a product variable given binary
    values of its factors: max(0, a+b-1) <= z <= min(a, b).

    At binary points the interval collapses to the single value a*b, which
    is what makes replacing each quadratic Bell term exact.
    """
    return max(0, left + right - 1), min(left, right)


def _row(values) -> str:
    return " ".join(format_exact(v) if isinstance(v, Fraction) else str(v) for v in values)


def canonical_text(problem: CompiledProblem) -> str:
    """Deterministic plain-text rendering of the compiled problem.

    Lists every variable, constraint, and objective term of the
    mixed-binary equivalent (product variables included), so identical
    builds serialize byte-for-byte.  Internal format, version tagged.
    """
    count = problem.machine_count
    lines = [
        "compiled-problem v1",
        f"mode {'single-stage' if problem.usage_locked else 'two-stage'}",
        f"machines {count}",
        f"deploy_cost {_row(problem.deploy_costs)}",
        f"offers {len(problem.offers)}",
    ]
    for o in problem.offers:
        lines.append(f"offer {o.id} capacity {o.capacity} cost {o.cost}")
    for s_idx, scen in enumerate(problem.scenarios, start=1):
        lines.append(f"scenario {s_idx}")
        lines.append(f"  probability {format_exact(scen.probability)}")
        lines.append(f"  demand_bits {format_exact(scen.demand_bits)}")
        lines.append(f"  power {_row(scen.powers)}")
        lines.append(f"  compute_cost {_row(scen.compute_costs)}")
        for i in range(count):
            lines.append(f"  bell_cost[{i + 1}] {_row(scen.bell_costs[i])}")
        pairs = sorted(scen.conflicts.forbidden)
        lines.append(
            "  conflicts " + (" ".join(f"{i + 1}-{j + 1}" for i, j in pairs) if pairs else "none")
        )
        tag = f"s{s_idx}"
        if not problem.usage_locked:
            for j in range(count):
                lines.append(f"  link use[{tag},{j + 1}] <= deploy[{j + 1}]")
        cover = " + ".join(
            f"{format_exact(scen.powers[j])}*use[{tag},{j + 1}]" for j in range(count)
        )
        for o in problem.offers:
            cover += f" + {o.capacity}*ondemand[{tag},{o.id}]"
        lines.append(f"  cover {cover if cover else '0'} >= {format_exact(scen.demand_bits)}")
        for i, j in pairs:
            lines.append(f"  conflict use[{tag},{i + 1}] + use[{tag},{j + 1}] <= 1")
        for i in range(count):
            for j in range(i + 1, count):
                coeff = scen.bell_costs[i][j] + scen.bell_costs[j][i]
                lines.append(
                    f"  product pair[{tag},{i + 1},{j + 1}] of use[{tag},{i + 1}] and "
                    f"use[{tag},{j + 1}] cost {coeff}"
                )
    objective = ["objective"]
    objective += [f"  + {c}*deploy[{j + 1}]" for j, c in enumerate(problem.deploy_costs)]
    for s_idx, scen in enumerate(problem.scenarios, start=1):
        tag = f"s{s_idx}"
        prob = format_exact(scen.probability)
        for j, c in enumerate(scen.compute_costs):
            objective.append(f"  + {prob}*{c}*use[{tag},{j + 1}]")
        for i in range(count):
            for j in range(i + 1, count):
                coeff = scen.bell_costs[i][j] + scen.bell_costs[j][i]
                objective.append(f"  + {prob}*{coeff}*pair[{tag},{i + 1},{j + 1}]")
        for o in problem.offers:
            objective.append(f"  + {prob}*{o.cost}*ondemand[{tag},{o.id}]")
    lines += objective
    return "\n".join(lines) + "\n"
