"""Reference first-stage policies the exact two-stage solver is compared to.

The expected-value policy collapses the scenario set to its mean (exact
rational averages, demand rounded up to whole bits) and solves the resulting
single-stage problem.  The random policy deploys each machine with
probability one half from a seeded deterministic generator.  Either policy
is then priced on the true stochastic model under optimal recourse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .engine import branch_and_bound, policy_solution
from .formulation import build_extensive_form, build_single_stage
from .model import (
    FirstStageDecision,
    ProblemInstance,
    QallocError,
    Solution,
    format_exact,
)

_MASK64 = (1 << 64) - 1
_EVF_MODES = ("bits", "qubits")

#: Bound on redraws per seed when resampling infeasible random draws.
RESAMPLE_LIMIT = 64


class EvfInfeasible(QallocError):
    """The averaged single-stage problem admits no feasible deployment."""


@dataclass(frozen=True)
class AveragedParameters:
    """Scenario set collapsed to its probability-weighted mean."""

    mode: str
    demand_bits_exact: Fraction
    demand_bits: int  # rounded up to whole bits
    powers: tuple[Fraction, ...]
    fidelity: tuple[tuple[Fraction, ...], ...]


def average_parameters(instance: ProblemInstance, mode: str = "bits") -> AveragedParameters:
    """Probability-weighted averages of demand, power, and fidelity.

    Demand averaging is done in bit space by default (mean of 2**n over
    scenarios, absent demand contributing zero).  In qubit mode the qubit
    counts themselves are averaged and re-exponentiated, which rounds far
    more aggressively; it is kept for comparison.
    """
    if mode not in _EVF_MODES:
        raise ValueError(f"mode must be one of {_EVF_MODES}, got {mode!r}")
    count = instance.machine_count
    powers = [Fraction(0)] * count
    fidelity = [[Fraction(0)] * count for _ in range(count)]
    demand = Fraction(0)
    for scen in instance.scenarios:
        if mode == "bits":
            demand += scen.probability * scen.demand_bits
        else:
            demand += scen.probability * (scen.demand_qubits or 0)
        for j in range(count):
            powers[j] += scen.probability * scen.power[j]
        for i in range(count):
            for j in range(count):
                if i != j:
                    fidelity[i][j] += scen.probability * scen.fidelity[i][j]
    if mode == "bits":
        demand_int = math.ceil(demand)
    else:
        demand_int = 1 << math.ceil(demand)
    return AveragedParameters(
        mode=mode,
        demand_bits_exact=demand,
        demand_bits=demand_int,
        powers=tuple(powers),
        fidelity=tuple(tuple(row) for row in fidelity),
    )


def evf_first_stage(instance: ProblemInstance, mode: str = "bits") -> FirstStageDecision:
    """Deployment chosen by solving the mean-parameter single-stage problem."""
    avg = average_parameters(instance, mode)
    problem = build_single_stage(instance, avg.demand_bits, avg.powers, avg.fidelity)
    report = branch_and_bound(problem)
    if report.solution.status != "optimal":
        raise EvfInfeasible(
            f"averaged problem (mode={mode}) has no feasible deployment"
        )
    return report.solution.first_stage


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _draw_vector(count: int, state: int, threshold: int) -> tuple[int, tuple[int, ...]]:
    bits = []
    for _ in range(count):
        state, word = _splitmix64(state)
        bits.append(1 if word >= threshold else 0)
    return state, tuple(bits)


def _threshold(probability: Fraction) -> int:
    if not 0 <= probability <= 1:
        raise ValueError(f"deployment probability must lie in [0, 1], got {probability}")
    return math.floor((1 - probability) * (1 << 64))


def random_first_stage(
    instance: ProblemInstance, seed: int, probability: Fraction = Fraction(1, 2)
) -> FirstStageDecision:
    """Deploy each machine independently with the given probability.

    One splitmix64 output word per machine, seeded with ``seed``; the
    machine is deployed iff its word is at least floor((1-p) * 2**64), so
    at the default p = 1/2 the draw is the word's top bit.  Reproducible
    across platforms and runs.
    """
    state = seed & _MASK64
    _, bits = _draw_vector(instance.machine_count, state, _threshold(probability))
    return FirstStageDecision(deployed=bits)


@dataclass(frozen=True)
class PolicyScore:
    """One scored policy on the true stochastic model.

    The aggregate "random_mean" row averages the feasible random seeds;
    ``feasible_count``/``seed_count`` report how many seeds entered the
    mean versus how many were scored.
    """

    model: str  # "proposed" | "evf" | "random" | "random_mean"
    seed: int | None
    deployment_count: int | Fraction
    on_demand_expected: Fraction | None
    total_cost: Fraction | None
    feasible: bool
    feasible_count: int | None = None
    seed_count: int | None = None


def _expected_on_demand(problem, solution: Solution) -> Fraction:
    total = Fraction(0)
    for scen, rec in zip(problem.scenarios, solution.recourse):
        total += scen.probability * sum(rec.on_demand)
    return total


def _mean(values) -> Fraction | None:
    values = list(values)
    if not values:
        return None
    return sum(values, Fraction(0)) / len(values)


def score_policies(
    instance: ProblemInstance,
    seeds: Sequence[int] = (),
    evf_mode: str = "bits",
    random_probability: Fraction = Fraction(1, 2),
    resample_infeasible: bool = False,
) -> tuple[PolicyScore, ...]:
    """Score the exact solver, the expected-value policy, and the seeded
    random policies on one instance; all use the true scenario recourse.

    Row order: proposed, evf, one random row per seed, then a random_mean
    aggregate whose means run over the feasible seeds only (the counts are
    reported on the row).  If the averaged problem behind the EVF policy is
    infeasible, the EVF row scores the empty deployment instead.  With
    ``resample_infeasible`` an infeasible random draw is redrawn from the
    same seed's stream (at most RESAMPLE_LIMIT times); the default keeps
    the first draw and marks it infeasible.
    """
    problem = build_extensive_form(instance)
    rows: list[PolicyScore] = []

    report = branch_and_bound(problem)
    if report.solution.status == "optimal":
        sol = report.solution
        rows.append(
            PolicyScore(
                model="proposed",
                seed=None,
                deployment_count=sol.first_stage.count,
                on_demand_expected=_expected_on_demand(problem, sol),
                total_cost=sol.cost.total,
                feasible=True,
            )
        )
    else:
        rows.append(PolicyScore("proposed", None, 0, None, None, False))

    try:
        evf = evf_first_stage(instance, mode=evf_mode)
    except EvfInfeasible:
        evf = FirstStageDecision(deployed=(0,) * instance.machine_count)
    rows.append(_score_fixed(problem, "evf", None, evf))

    threshold = _threshold(random_probability)
    randoms: list[PolicyScore] = []
    for seed in seeds:
        state = seed & _MASK64
        state, bits = _draw_vector(instance.machine_count, state, threshold)
        score = _score_fixed(problem, "random", seed, FirstStageDecision(deployed=bits))
        if resample_infeasible:
            attempts = 1
            while not score.feasible and attempts < RESAMPLE_LIMIT:
                state, bits = _draw_vector(instance.machine_count, state, threshold)
                score = _score_fixed(
                    problem, "random", seed, FirstStageDecision(deployed=bits)
                )
                attempts += 1
        randoms.append(score)
    rows.extend(randoms)

    if randoms:
        ok = [s for s in randoms if s.feasible]
        rows.append(
            PolicyScore(
                model="random_mean",
                seed=None,
                deployment_count=_mean(Fraction(s.deployment_count) for s in ok) or 0,
                on_demand_expected=_mean(s.on_demand_expected for s in ok),
                total_cost=_mean(s.total_cost for s in ok),
                feasible=bool(ok),
                feasible_count=len(ok),
                seed_count=len(randoms),
            )
        )
    return tuple(rows)


def scores_to_csv(rows: Sequence[PolicyScore]) -> str:
    """Comparison table as CSV.

    Exact values are printed exactly (integers or terminating decimals
    where possible); the mean row's feasible cell reads "k/n" for k
    feasible seeds out of n.
    """
    lines = ["model,seed,deployment_count,on_demand_expected,total_cost,feasible"]
    for row in rows:
        if row.seed_count is not None:
            feasible = f"{row.feasible_count}/{row.seed_count}"
        else:
            feasible = "true" if row.feasible else "false"
        lines.append(
            ",".join(
                (
                    row.model,
                    "" if row.seed is None else str(row.seed),
                    format_exact(Fraction(row.deployment_count)),
                    "" if row.on_demand_expected is None else format_exact(row.on_demand_expected),
                    "" if row.total_cost is None else format_exact(row.total_cost),
                    feasible,
                )
            )
        )
    return "\n".join(lines) + "\n"


def _score_fixed(problem, model: str, seed: int | None, decision: FirstStageDecision) -> PolicyScore:
    solution = policy_solution(problem, decision)
    if solution is None:
        return PolicyScore(model, seed, decision.count, None, None, False)
    return PolicyScore(
        model=model,
        seed=seed,
        deployment_count=decision.count,
        on_demand_expected=_expected_on_demand(problem, solution),
        total_cost=solution.cost.total,
        feasible=True,
    )
