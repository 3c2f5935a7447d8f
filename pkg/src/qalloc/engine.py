"""Exact solvers for the compiled provisioning models.

Two interchangeable solvers produce identical output on every instance:

* ``exhaustive_solve`` scores all 2**J deployment vectors against
  per-scenario recourse tables built with a subset-minimum sweep.
* ``branch_and_bound`` explores deployment bits depth first (deploy branch
  first) and prunes on a valid lower bound, so the first incumbent at any
  cost level is also the canonical tie-break winner.

Ties are broken lexicographically, preferring vectors that deploy (and use)
low-numbered machines; costs stay exact integers or rationals throughout.
"""

from __future__ import annotations

import bisect
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import NamedTuple, Sequence

from .formulation import CompiledProblem
from .model import (
    CostBreakdown,
    FirstStageDecision,
    QallocError,
    ScenarioRecourse,
    Solution,
    format_exact,
)

MAX_EXHAUSTIVE_MACHINES = 20
EXACT_OFFER_SUBSET_LIMIT = 16

INFEASIBLE_BOUND = float("inf")


class InstanceTooLarge(QallocError):
    """Machine count exceeds what the exact solvers are sized for."""


def _revmask(mask: int, width: int) -> int:
    # Value of the bit vector read with machine 1 as the most significant
    # bit; larger means lexicographically earlier ones.
    out = 0
    for i in range(width):
        if mask >> i & 1:
            out |= 1 << (width - 1 - i)
    return out


def _bits(mask: int, width: int) -> tuple[int, ...]:
    return tuple(mask >> i & 1 for i in range(width))


def _mask(bits: Sequence[int]) -> int:
    out = 0
    for i, b in enumerate(bits):
        if b:
            out |= 1 << i
    return out


class _Recourse(NamedTuple):
    cost: int
    used_mask: int
    od_mask: int
    compute: int
    bell: int
    od_cost: int


class _OfferFill:
    """Minimum-cost selection of on-demand machines covering a residual.

    Identical offers are filled by a closed-form cheapest prefix.  Distinct
    offers up to a subset-enumerable fleet are solved exactly against a
    precomputed capacity table; beyond that a greedy cover with single-swap
    improvement runs and is flagged on the report.
    """

    def __init__(self, offers):
        self.offers = tuple(offers)
        self.count = len(self.offers)
        self.total_capacity = sum(o.capacity for o in self.offers)
        self.homogeneous = len({(o.capacity, o.cost) for o in self.offers}) <= 1
        self.heuristic_used = False
        self._table = None
        self._memo: dict = {}

    def fill(self, residual) -> tuple[int, int] | None:
        """(offer mask, cost) covering ``residual`` bits, or None."""
        if residual <= 0:
            return 0, 0
        if residual > self.total_capacity:
            return None
        hit = self._memo.get(residual)
        if hit is None:
            hit = self._fill(residual)
            self._memo[residual] = hit
        return None if hit == () else hit

    def _fill(self, residual):
        if self.homogeneous:
            cap = self.offers[0].capacity
            if cap <= 0:
                return ()
            units = math.ceil(residual / cap)
            if units > self.count:
                return ()
            return (1 << units) - 1, units * self.offers[0].cost
        if self.count <= EXACT_OFFER_SUBSET_LIMIT:
            caps, best = self._subset_table()
            idx = bisect.bisect_left(caps, residual)
            if idx == len(caps):
                return ()
            _, _, mask, cost = best[idx]
            return mask, cost
        return self._greedy(residual)

    def _subset_table(self):
        if self._table is None:
            n = self.count
            cap = [0] * (1 << n)
            cost = [0] * (1 << n)
            for m in range(1, 1 << n):
                low = (m & -m).bit_length() - 1
                rest = m & (m - 1)
                cap[m] = cap[rest] + self.offers[low].capacity
                cost[m] = cost[rest] + self.offers[low].cost
            order = sorted(range(1 << n), key=lambda m: cap[m])
            caps = [cap[m] for m in order]
            best = [None] * (1 << n)
            run = None
            for pos in range(len(order) - 1, -1, -1):
                m = order[pos]
                cand = (cost[m], -_revmask(m, n), m, cost[m])
                if run is None or cand < run:
                    run = cand
                best[pos] = run
            self._table = (caps, best)
        return self._table

    def _greedy(self, residual):
        self.heuristic_used = True
        order = sorted(range(self.count), key=lambda r: (self.offers[r].cost, self.offers[r].id))
        chosen = []
        cover = 0
        for r in order:
            if cover >= residual:
                break
            chosen.append(r)
            cover += self.offers[r].capacity
        if cover < residual:
            return ()
        for r in sorted(chosen, key=lambda r: -self.offers[r].cost):
            if cover - self.offers[r].capacity >= residual:
                chosen.remove(r)
                cover -= self.offers[r].capacity
        improved = True
        while improved:
            improved = False
            outside = [r for r in order if r not in chosen]
            for a in list(chosen):
                for b in outside:
                    new_cover = cover - self.offers[a].capacity + self.offers[b].capacity
                    if new_cover >= residual and self.offers[b].cost < self.offers[a].cost:
                        chosen.remove(a)
                        chosen.append(b)
                        cover = new_cover
                        improved = True
                        break
                if improved:
                    break
        mask = 0
        cost = 0
        for r in chosen:
            mask |= 1 << r
            cost += self.offers[r].cost
        return mask, cost


class _ScenarioEngine:
    """Exact second-stage optimizer for one scenario."""

    def __init__(self, problem: CompiledProblem, index: int):
        scen = problem.scenarios[index]
        self.locked = problem.usage_locked
        self.count = problem.machine_count
        self.demand = scen.demand_bits
        self.power = scen.powers
        self.compute_cost = scen.compute_costs
        count = self.count
        self.pair_cost = [
            [scen.bell_costs[i][j] + scen.bell_costs[j][i] for j in range(count)]
            for i in range(count)
        ]
        self.conflict_mask = [0] * count
        for i, j in scen.conflicts.forbidden:
            self.conflict_mask[i] |= 1 << j
            self.conflict_mask[j] |= 1 << i
        self.fill = _OfferFill(() if self.locked else problem.offers)
        self._ccom_sorted = sorted(self.compute_cost)
        self._memo: dict[int, _Recourse | None] = {}

    def usage_value(self, idxs: Sequence[int]) -> tuple:
        """(compute, bell, capacity) for an explicit usage set."""
        compute = 0
        bell = 0
        cap = 0
        for a, i in enumerate(idxs):
            compute += self.compute_cost[i]
            cap += self.power[i]
            for j in idxs[a + 1 :]:
                bell += self.pair_cost[i][j]
        return compute, bell, cap

    def conflict_free_mask(self, sub: int) -> bool:
        m = sub
        while m:
            i = (m & -m).bit_length() - 1
            if self.conflict_mask[i] & sub:
                return False
            m &= m - 1
        return True

    def components(self, used_mask: int, od_mask: int) -> tuple[int, int, int]:
        idxs = [i for i in range(self.count) if used_mask >> i & 1]
        compute, bell, _ = self.usage_value(idxs)
        od_cost = sum(o.cost for r, o in enumerate(self.fill.offers) if od_mask >> r & 1)
        return compute, bell, od_cost

    def solve(self, deployed_mask: int) -> _Recourse | None:
        if deployed_mask in self._memo:
            return self._memo[deployed_mask]
        result = self._locked_eval(deployed_mask) if self.locked else self._free(deployed_mask)
        self._memo[deployed_mask] = result
        return result

    def _locked_eval(self, deployed_mask: int) -> _Recourse | None:
        if not self.conflict_free_mask(deployed_mask):
            return None
        idxs = [i for i in range(self.count) if deployed_mask >> i & 1]
        compute, bell, cap = self.usage_value(idxs)
        if cap < self.demand:
            return None
        return _Recourse(compute + bell, deployed_mask, 0, compute, bell, 0)

    def _free(self, deployed_mask: int) -> _Recourse | None:
        idxs = [i for i in range(self.count) if deployed_mask >> i & 1]
        width = self.count
        best = None
        best_key = None
        for m in range(len(idxs) + 1):
            # sums of the m smallest compute costs only grow with m, so a
            # strict overshoot closes every later level
            floor = sum(self._ccom_sorted[:m])
            if best is not None and floor > best.cost:
                break
            for combo in combinations(idxs, m):
                sub = 0
                for i in combo:
                    sub |= 1 << i
                if not self.conflict_free_mask(sub):
                    continue
                compute, bell, cap = self.usage_value(combo)
                machine_cost = compute + bell
                if best is not None and machine_cost > best.cost:
                    continue
                filled = self.fill.fill(self.demand - cap)
                if filled is None:
                    continue
                od_mask, od_cost = filled
                cost = machine_cost + od_cost
                key = (cost, -_revmask(sub, width), -_revmask(od_mask, self.fill.count))
                if best is None or key < best_key:
                    best = _Recourse(cost, sub, od_mask, compute, bell, od_cost)
                    best_key = key
        return best

    def table(self) -> list[_Recourse | None]:
        """Optimal recourse for every deployment mask, canonical ties included."""
        width = self.count
        size = 1 << width
        power = self.power
        compute_cost = self.compute_cost
        pair_cost = self.pair_cost
        conflict_mask = self.conflict_mask
        cf = [True] * size
        cap = [0] * size
        compute = [0] * size
        bell = [0] * size
        for m in range(1, size):
            low = (m & -m).bit_length() - 1
            rest = m & (m - 1)
            cf[m] = cf[rest] and conflict_mask[low] & rest == 0
            cap[m] = cap[rest] + power[low]
            compute[m] = compute[rest] + compute_cost[low]
            cross = 0
            r = rest
            while r:
                i = (r & -r).bit_length() - 1
                cross += pair_cost[low][i]
                r &= r - 1
            bell[m] = bell[rest] + cross
        if self.locked:
            out: list[_Recourse | None] = [None] * size
            for m in range(size):
                if cf[m] and cap[m] >= self.demand:
                    out[m] = _Recourse(compute[m] + bell[m], m, 0, compute[m], bell[m], 0)
            return out
        rev = [0] * size
        for m in range(1, size):
            rev[m] = (rev[m >> 1] >> 1) | ((m & 1) << (width - 1))
        od_width = self.fill.count
        od_rev: dict[int, int] = {0: 0}
        val: list[tuple | None] = [None] * size
        for m in range(size):
            if not cf[m]:
                continue
            filled = self.fill.fill(self.demand - cap[m])
            if filled is None:
                continue
            od_mask, od_cost = filled
            if od_mask not in od_rev:
                od_rev[od_mask] = _revmask(od_mask, od_width)
            val[m] = (
                compute[m] + bell[m] + od_cost,
                -rev[m],
                -od_rev[od_mask],
                m,
                od_mask,
                od_cost,
            )
        # subset-minimum sweep: after processing every bit, g[mask] holds the
        # best candidate over all usage subsets of mask
        g = list(val)
        for b in range(width):
            bit = 1 << b
            for m in range(size):
                if m & bit:
                    cand = g[m ^ bit]
                    if cand is not None and (g[m] is None or cand < g[m]):
                        g[m] = cand
        out = [None] * size
        for m in range(size):
            entry = g[m]
            if entry is not None:
                cost, _, _, used, od_mask, od_cost = entry
                out[m] = _Recourse(cost, used, od_mask, compute[used], bell[used], od_cost)
        return out


@dataclass(frozen=True)
class SearchNode:
    """Partial deployment vector: per-machine bits fixed to 0/1 or open."""

    fixed: tuple[int | None, ...]
    committed_cost: int
    bound: Fraction | float | None = None

    @classmethod
    def root(cls, machine_count: int) -> "SearchNode":
        return cls(fixed=(None,) * machine_count, committed_cost=0)

    @classmethod
    def from_masks(
        cls, problem: CompiledProblem, ones_mask: int, decided_mask: int
    ) -> "SearchNode":
        count = problem.machine_count
        fixed = tuple(
            (ones_mask >> j & 1) if decided_mask >> j & 1 else None for j in range(count)
        )
        committed = sum(problem.deploy_costs[j] for j in range(count) if ones_mask >> j & 1)
        return cls(fixed=fixed, committed_cost=committed)


@dataclass(frozen=True)
class SolverReport:
    solution: Solution
    nodes_explored: int
    wall_time_seconds: float
    solver_id: str
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "solver": self.solver_id,
            "nodes_explored": self.nodes_explored,
            "wall_time_seconds": round(self.wall_time_seconds, 6),
            "notes": list(self.notes),
            "solution": solution_to_dict(self.solution),
        }


def solution_to_dict(solution: Solution) -> dict:
    out: dict = {"status": solution.status}
    if solution.status != "optimal":
        return out
    out["deployed"] = list(solution.first_stage.deployed)
    out["bitmap"] = "".join(str(b) for b in solution.first_stage.deployed)
    out["recourse"] = [
        {"used": list(r.used), "on_demand": list(r.on_demand)} for r in solution.recourse
    ]
    cost = solution.cost
    out["cost"] = {
        "deployment": format_exact(cost.deployment),
        "expected_compute": format_exact(cost.expected_compute),
        "expected_bell": format_exact(cost.expected_bell),
        "expected_on_demand": format_exact(cost.expected_on_demand),
        "total": format_exact(cost.total),
    }
    return out


def _engines(problem: CompiledProblem) -> list[_ScenarioEngine]:
    return [_ScenarioEngine(problem, s) for s in range(len(problem.scenarios))]


def _deploy_cost(problem: CompiledProblem, mask: int) -> int:
    return sum(problem.deploy_costs[j] for j in range(problem.machine_count) if mask >> j & 1)


def _assemble(
    problem: CompiledProblem, engines: list[_ScenarioEngine], mask: int
) -> Solution | None:
    count = problem.machine_count
    recs = []
    for engine in engines:
        rec = engine.solve(mask)
        if rec is None:
            return None
        recs.append(rec)
    expected_compute = Fraction(0)
    expected_bell = Fraction(0)
    expected_od = Fraction(0)
    recourse = []
    for scen, rec in zip(problem.scenarios, recs):
        expected_compute += scen.probability * rec.compute
        expected_bell += scen.probability * rec.bell
        expected_od += scen.probability * rec.od_cost
        recourse.append(
            ScenarioRecourse(
                used=_bits(rec.used_mask, count),
                on_demand=_bits(rec.od_mask, len(problem.offers)),
            )
        )
    return Solution(
        status="optimal",
        first_stage=FirstStageDecision(deployed=_bits(mask, count)),
        recourse=tuple(recourse),
        cost=CostBreakdown(
            deployment=_deploy_cost(problem, mask),
            expected_compute=expected_compute,
            expected_bell=expected_bell,
            expected_on_demand=expected_od,
        ),
    )


def _heuristic_notes(engines: list[_ScenarioEngine]) -> tuple[str, ...]:
    if any(e.fill.heuristic_used for e in engines):
        return ("on-demand fill used greedy heuristic (large distinct-offer fleet)",)
    return ()


def recourse_solve(
    problem: CompiledProblem, deployed: FirstStageDecision, scenario_index: int
) -> tuple[ScenarioRecourse, int | Fraction] | None:
    """Optimal second stage for a fixed deployment in one scenario.

    Returns the canonical usage/on-demand choice with its unweighted cost,
    or None when the scenario cannot be covered.
    """
    engine = _ScenarioEngine(problem, scenario_index)
    rec = engine.solve(_mask(deployed.deployed))
    if rec is None:
        return None
    recourse = ScenarioRecourse(
        used=_bits(rec.used_mask, problem.machine_count),
        on_demand=_bits(rec.od_mask, len(problem.offers)),
    )
    return recourse, rec.cost


def evaluate_policy(
    problem: CompiledProblem, deployed: FirstStageDecision
) -> CostBreakdown | None:
    """Exact cost of a fixed first stage under optimal recourse, or None if
    some scenario is uncoverable."""
    solution = policy_solution(problem, deployed)
    return None if solution is None else solution.cost


def policy_solution(
    problem: CompiledProblem, deployed: FirstStageDecision
) -> Solution | None:
    return _assemble(problem, _engines(problem), _mask(deployed.deployed))


def exhaustive_solve(problem: CompiledProblem) -> SolverReport:
    """Reference oracle: scores every deployment vector.

    Among minimum-cost vectors the lexicographically first (machine 1
    varying slowest, deploy preferred over skip) is returned.
    """
    count = problem.machine_count
    if count > MAX_EXHAUSTIVE_MACHINES:
        raise InstanceTooLarge(
            f"exhaustive solver supports up to {MAX_EXHAUSTIVE_MACHINES} machines, got {count}"
        )
    start = time.perf_counter()
    engines = _engines(problem)
    tables = [engine.table() for engine in engines]
    size = 1 << count
    rev = [0] * size
    for m in range(1, size):
        rev[m] = (rev[m >> 1] >> 1) | ((m & 1) << (count - 1))
    dep = [0] * size
    for m in range(1, size):
        dep[m] = dep[m & (m - 1)] + problem.deploy_costs[(m & -m).bit_length() - 1]
    probs = [s.probability for s in problem.scenarios]
    best = None
    for m in range(size):
        total = Fraction(dep[m])
        ok = True
        for prob, table in zip(probs, tables):
            rec = table[m]
            if rec is None:
                ok = False
                break
            if rec.cost:
                total += prob * rec.cost
        if not ok:
            continue
        cand = (total, -rev[m], m)
        if best is None or cand < best:
            best = cand
    if best is None:
        return SolverReport(
            solution=Solution(status="infeasible"),
            nodes_explored=size,
            wall_time_seconds=time.perf_counter() - start,
            solver_id="exhaustive",
            notes=_heuristic_notes(engines),
        )
    solution = _assemble(problem, engines, best[2])
    return SolverReport(
        solution=solution,
        nodes_explored=size,
        wall_time_seconds=time.perf_counter() - start,
        solver_id="exhaustive",
        notes=_heuristic_notes(engines),
    )


class _BoundData:
    """Static per-scenario data shared by the node bounds."""

    def __init__(self, problem: CompiledProblem):
        self.problem = problem
        count = problem.machine_count
        self.rows = []
        for scen in problem.scenarios:
            pair_min = 0
            pairs = [
                scen.bell_costs[i][j] + scen.bell_costs[j][i]
                for i in range(count)
                for j in range(i + 1, count)
            ]
            if pairs:
                pair_min = min(pairs)
            pos = [o for o in problem.offers if o.capacity > 0]
            self.rows.append(
                {
                    "scenario": scen,
                    "pair_min": pair_min,
                    "offer_total": sum(o.capacity for o in problem.offers),
                    "offer_rate": min((Fraction(o.cost, o.capacity) for o in pos), default=None),
                    "offer_cap_max": max((o.capacity for o in pos), default=0),
                    "offer_cost_min": min((o.cost for o in pos), default=0),
                }
            )

    def offer_floor(self, row, residual):
        """Valid underestimate of the on-demand cost to cover ``residual``."""
        if residual <= 0:
            return 0
        if row["offer_rate"] is None or residual > row["offer_total"]:
            return None
        by_rate = residual * row["offer_rate"]
        by_count = math.ceil(residual / row["offer_cap_max"]) * row["offer_cost_min"]
        return max(by_rate, by_count)


def lower_bound(problem: CompiledProblem, node: SearchNode) -> Fraction | float:
    """Node bound: committed deployment cost plus, per scenario, the
    residual demand priced at the cheapest available bits-per-cost rate
    (machines not fixed off, plus on-demand offers).

    Returns +inf when some scenario's residual exceeds every remaining bit
    of capacity, certifying the subtree infeasible.
    """
    fixed = node.fixed
    count = problem.machine_count
    bound = Fraction(node.committed_cost)
    offer_capacity = sum(o.capacity for o in problem.offers)
    offer_rates = [Fraction(o.cost, o.capacity) for o in problem.offers if o.capacity > 0]
    for scen in problem.scenarios:
        committed_capacity = sum(scen.powers[j] for j in range(count) if fixed[j] == 1)
        residual = scen.demand_bits - committed_capacity
        if residual <= 0:
            continue
        open_capacity = sum(
            scen.powers[j] for j in range(count) if fixed[j] is None
        )
        if residual > open_capacity + offer_capacity:
            return INFEASIBLE_BOUND
        rates = [
            Fraction(scen.compute_costs[j], scen.powers[j])
            for j in range(count)
            if fixed[j] != 0 and scen.powers[j] > 0
        ]
        rates += offer_rates
        if not rates:
            return INFEASIBLE_BOUND
        bound += scen.probability * residual * min(rates)
    return bound


def _strong_bound(data: _BoundData, ones_mask: int, decided_mask: int) -> Fraction | float:
    """Tighter valid bound used alongside ``lower_bound`` for pruning.

    Per scenario, minimize over the count m of additional machines used:
    the m cheapest machine charges (deploy included when still undecided),
    a Bell floor of C(m,2) cheapest pairs, and an on-demand floor for
    whatever the m largest open capacities cannot cover.
    """
    problem = data.problem
    count = problem.machine_count
    locked = problem.usage_locked
    ones = [j for j in range(count) if ones_mask >> j & 1]
    open_idx = [j for j in range(count) if not decided_mask >> j & 1]
    bound = Fraction(sum(problem.deploy_costs[j] for j in ones))
    for row in data.rows:
        scen = row["scenario"]
        pair_min = row["pair_min"]
        if locked:
            # deployment forces usage, so fixed machines already pay
            # compute and their mutual Bell pairs; conflicts are fatal
            for a in range(len(ones)):
                for b in range(a + 1, len(ones)):
                    if (ones[a], ones[b]) in scen.conflicts.forbidden:
                        return INFEASIBLE_BOUND
            base_compute = sum(scen.compute_costs[j] for j in ones)
            base_bell = 0
            for a, i in enumerate(ones):
                for j in ones[a + 1 :]:
                    base_bell += scen.bell_costs[i][j] + scen.bell_costs[j][i]
            base_cap = sum(scen.powers[j] for j in ones)
            extras = sorted(problem.deploy_costs[j] + scen.compute_costs[j] for j in open_idx)
            caps = sorted((scen.powers[j] for j in open_idx), reverse=True)
            residual0 = scen.demand_bits - base_cap
            best = None
            cap_run = 0
            extra_run = 0
            for m in range(len(extras) + 1):
                if m > 0:
                    extra_run += extras[m - 1]
                    cap_run += caps[m - 1]
                if residual0 - cap_run > 0:
                    continue
                cand = Fraction(extra_run + m * (m - 1) // 2 * pair_min)
                if best is None or cand < best:
                    best = cand
                break  # larger m only adds nonnegative cost once covered
            if best is None:
                return INFEASIBLE_BOUND
            bound += scen.probability * (Fraction(base_compute + base_bell) + best)
            continue
        avail = [
            j
            for j in range(count)
            if (ones_mask >> j & 1 or not decided_mask >> j & 1) and scen.powers[j] > 0
        ]
        extras = sorted(
            scen.compute_costs[j]
            + (0 if decided_mask >> j & 1 else problem.deploy_costs[j])
            for j in avail
        )
        caps = sorted((scen.powers[j] for j in avail), reverse=True)
        best = None
        cap_run = 0
        extra_run = 0
        for m in range(len(extras) + 1):
            if m > 0:
                extra_run += extras[m - 1]
                cap_run += caps[m - 1]
            floor = data.offer_floor(row, scen.demand_bits - cap_run)
            if floor is None:
                continue
            cand = Fraction(extra_run + m * (m - 1) // 2 * pair_min) + floor
            if best is None or cand < best:
                best = cand
        if best is None:
            return INFEASIBLE_BOUND
        bound += scen.probability * best
    return bound


def branch_and_bound(problem: CompiledProblem) -> SolverReport:
    """Depth-first exact search over deployment bits.

    Machines branch in index order with the deploy branch first, so leaves
    appear exactly in tie-break preference order and a first-found optimum
    is canonical.  Nodes whose lower bound reaches the incumbent cost are
    pruned; the documented bound and a tighter refinement are both applied,
    whichever is larger (each is a valid underestimate).
    """
    count = problem.machine_count
    if count > MAX_EXHAUSTIVE_MACHINES:
        raise InstanceTooLarge(
            f"branch and bound supports up to {MAX_EXHAUSTIVE_MACHINES} machines, got {count}"
        )
    start = time.perf_counter()
    engines = _engines(problem)
    data = _BoundData(problem)
    probs = [s.probability for s in problem.scenarios]
    full = (1 << count) - 1
    nodes = 0
    incumbent_cost = None
    incumbent_mask = None

    def leaf_value(mask: int):
        total = Fraction(_deploy_cost(problem, mask))
        for prob, engine in zip(probs, engines):
            rec = engine.solve(mask)
            if rec is None:
                return None
            if rec.cost:
                total += prob * rec.cost
        return total

    def visit(ones: int, decided: int):
        nonlocal nodes, incumbent_cost, incumbent_mask
        nodes += 1
        if decided == full:
            value = leaf_value(ones)
            if value is not None and (incumbent_cost is None or value < incumbent_cost):
                incumbent_cost = value
                incumbent_mask = ones
            return
        if incumbent_cost is not None:
            node = SearchNode.from_masks(problem, ones, decided)
            simple = lower_bound(problem, node)
            strong = _strong_bound(data, ones, decided)
            bound = simple if simple > strong else strong
            if bound >= incumbent_cost:
                return
        j = 0
        while decided >> j & 1:
            j += 1
        bit = 1 << j
        visit(ones | bit, decided | bit)
        visit(ones, decided | bit)

    visit(0, 0)
    if incumbent_mask is None:
        return SolverReport(
            solution=Solution(status="infeasible"),
            nodes_explored=nodes,
            wall_time_seconds=time.perf_counter() - start,
            solver_id="branch_and_bound",
            notes=_heuristic_notes(engines),
        )
    solution = _assemble(problem, engines, incumbent_mask)
    return SolverReport(
        solution=solution,
        nodes_explored=nodes,
        wall_time_seconds=time.perf_counter() - start,
        solver_id="branch_and_bound",
        notes=_heuristic_notes(engines),
    )


def solve(problem: CompiledProblem, solver: str = "branch_and_bound") -> SolverReport:
    if solver in ("branch_and_bound", "bnb"):
        return branch_and_bound(problem)
    if solver == "exhaustive":
        return exhaustive_solve(problem)
    raise ValueError(f"unknown solver {solver!r}")


def verify_solution(problem: CompiledProblem, solution: Solution) -> list[str]:
    """Independent feasibility and accounting check; returns violations."""
    issues: list[str] = []
    if solution.status != "optimal":
        return issues
    count = problem.machine_count
    deployed = solution.first_stage.deployed
    if len(deployed) != count:
        return [f"first stage has {len(deployed)} entries, expected {count}"]
    if len(solution.recourse) != len(problem.scenarios):
        return [
            f"{len(solution.recourse)} recourse blocks for {len(problem.scenarios)} scenarios"
        ]
    expected_compute = Fraction(0)
    expected_bell = Fraction(0)
    expected_od = Fraction(0)
    for s_idx, (scen, rec) in enumerate(zip(problem.scenarios, solution.recourse), start=1):
        used = rec.used
        for j in range(count):
            if used[j] and not deployed[j]:
                issues.append(f"scenario {s_idx}: machine {j + 1} used but not deployed")
        if problem.usage_locked and tuple(used) != tuple(deployed):
            issues.append(f"scenario {s_idx}: usage differs from deployment in locked mode")
        idxs = [j for j in range(count) if used[j]]
        for a in range(len(idxs)):
            for b in range(a + 1, len(idxs)):
                if (idxs[a], idxs[b]) in scen.conflicts.forbidden:
                    issues.append(
                        f"scenario {s_idx}: machines {idxs[a] + 1} and {idxs[b] + 1} conflict"
                    )
        capacity = sum(scen.powers[j] for j in idxs)
        od_cost = 0
        for r, flag in enumerate(rec.on_demand):
            if flag:
                capacity += problem.offers[r].capacity
                od_cost += problem.offers[r].cost
        if capacity < scen.demand_bits:
            issues.append(
                f"scenario {s_idx}: capacity {capacity} below demand {scen.demand_bits}"
            )
        compute = sum(scen.compute_costs[j] for j in idxs)
        bell = 0
        for a in range(len(idxs)):
            for b in range(a + 1, len(idxs)):
                i, j = idxs[a], idxs[b]
                bell += scen.bell_costs[i][j] + scen.bell_costs[j][i]
        expected_compute += scen.probability * compute
        expected_bell += scen.probability * bell
        expected_od += scen.probability * od_cost
    deployment = sum(problem.deploy_costs[j] for j in range(count) if deployed[j])
    cost = solution.cost
    if cost.deployment != deployment:
        issues.append(f"deployment cost {cost.deployment} != recomputed {deployment}")
    for name, have, want in (
        ("expected_compute", cost.expected_compute, expected_compute),
        ("expected_bell", cost.expected_bell, expected_bell),
        ("expected_on_demand", cost.expected_on_demand, expected_od),
    ):
        if have != want:
            issues.append(f"{name} {have} != recomputed {want}")
    if cost.total != deployment + expected_compute + expected_bell + expected_od:
        issues.append("total does not equal the sum of its parts")
    return issues
