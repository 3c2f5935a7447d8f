"""Problem data model: exact arithmetic, validation, and instance I/O.

All monetary quantities are integers (normalized units).  Probabilities and
fidelities are exact rationals (`fractions.Fraction`) parsed from decimal
strings, so every feasibility comparison and every optimum is exact and
platform independent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

ExactNumber = Fraction

#: Largest supported task demand in qubits (2**62 still fits a machine word).
MAX_DEMAND_QUBITS = 62

#: Size of the default on-demand fleet.  Large enough that recourse stays
#: feasible for every demand reachable in the shipped parameter sweeps.
DEFAULT_ONDEMAND_FLEET = 32


class QallocError(Exception):
    """Base class for all package errors."""


class DemandTooLarge(QallocError):
    """Task demand exceeds MAX_DEMAND_QUBITS qubits."""


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.code} at {self.path}: {self.message}"


class InvalidInstanceError(QallocError):
    """Raised by validate_instance; carries every detected violation."""

    def __init__(self, issues: Sequence[ValidationIssue]):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))


def parse_exact(text: str) -> Fraction:
    """Parse a decimal string (or 'p/q') into an exact rational.

    '0.8' parses to exactly 4/5; no binary rounding is involved.
    """
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not an exact number: {text!r}") from exc


def format_exact(value: Fraction | int) -> str:
    """Render an exact rational canonically.

    Integers print without a decimal point, terminating decimals print as
    decimals with no trailing zeros, everything else prints as 'p/q'.
    """
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    scale = max(twos, fives)
    scaled = abs(value.numerator) * 10**scale // value.denominator
    digits = str(scaled).rjust(scale + 1, "0")
    whole, frac = digits[:-scale], digits[-scale:].rstrip("0")
    sign = "-" if value < 0 else ""
    return f"{sign}{whole}.{frac}" if frac else f"{sign}{whole}"


def demand_bits(demand_qubits: int | None) -> int:
    """Convert a task demand in qubits to the bit count it must cover.

    A demand of n qubits stands for 2**n classical possibilities; an absent
    demand means the no-demand scenario and converts to 0 (note this differs
    from a demand of 0 qubits, which converts to 1).
    """
    if demand_qubits is None:
        return 0
    if demand_qubits < 0:
        raise ValueError("demand_qubits must be >= 0")
    if demand_qubits > MAX_DEMAND_QUBITS:
        raise DemandTooLarge(
            f"demand of {demand_qubits} qubits exceeds the supported maximum "
            f"of {MAX_DEMAND_QUBITS}"
        )
    return 1 << demand_qubits


def _tup(rows: Iterable[Iterable]) -> tuple[tuple, ...]:
    return tuple(tuple(r) for r in rows)


@dataclass(frozen=True)
class QuantumComputer:
    """One reservable machine: qubit count and its deployment/compute costs."""

    id: int
    base_qubits: int
    deploy_cost: int
    compute_cost: int


@dataclass(frozen=True)
class LinkTable:
    """Pairwise link data between machines (diagonal entries are unused)."""

    capacity: tuple[tuple[int, ...], ...]
    base_fidelity: tuple[tuple[Fraction, ...], ...]
    bell_cost: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "capacity", _tup(self.capacity))
        object.__setattr__(self, "base_fidelity", _tup(self.base_fidelity))
        object.__setattr__(self, "bell_cost", _tup(self.bell_cost))


@dataclass(frozen=True)
class OnDemandOffer:
    """Externally purchasable capacity, exempt from link constraints."""

    id: int
    capacity: int
    cost: int


@dataclass(frozen=True)
class Scenario:
    """One uncertainty realization: probability, demand, powers, fidelities."""

    id: int
    probability: Fraction
    demand_qubits: int | None
    power: tuple[int, ...]
    fidelity: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "power", tuple(self.power))
        object.__setattr__(self, "fidelity", _tup(self.fidelity))

    @property
    def demand_bits(self) -> int:
        return demand_bits(self.demand_qubits)


@dataclass(frozen=True)
class ProblemInstance:
    """Full input to either formulation.  Validated instances are immutable."""

    computers: tuple[QuantumComputer, ...]
    links: LinkTable
    offers: tuple[OnDemandOffer, ...]
    scenarios: tuple[Scenario, ...]

    def __post_init__(self):
        object.__setattr__(self, "computers", tuple(self.computers))
        object.__setattr__(self, "offers", tuple(self.offers))
        object.__setattr__(self, "scenarios", tuple(self.scenarios))

    @property
    def machine_count(self) -> int:
        return len(self.computers)


@dataclass(frozen=True)
class FirstStageDecision:
    """Deployment bit-vector over machines, index order matching ids."""

    deployed: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "deployed", tuple(int(b) for b in self.deployed))

    @property
    def count(self) -> int:
        return sum(self.deployed)


@dataclass(frozen=True)
class ScenarioRecourse:
    """Per-scenario reaction: machines actually used plus on-demand units."""

    used: tuple[int, ...]
    on_demand: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "used", tuple(int(b) for b in self.used))
        object.__setattr__(self, "on_demand", tuple(int(b) for b in self.on_demand))


@dataclass(frozen=True)
class CostBreakdown:
    """Objective split into its four components; total is exact."""

    deployment: int
    expected_compute: Fraction
    expected_bell: Fraction
    expected_on_demand: Fraction

    @property
    def total(self) -> Fraction:
        return (
            self.deployment
            + self.expected_compute
            + self.expected_bell
            + self.expected_on_demand
        )


@dataclass(frozen=True)
class Solution:
    status: str  # "optimal" | "infeasible"
    first_stage: FirstStageDecision | None = None
    recourse: tuple[ScenarioRecourse, ...] = ()
    cost: CostBreakdown | None = None

    def __post_init__(self):
        object.__setattr__(self, "recourse", tuple(self.recourse))


# ---------------------------------------------------------------------------
# validation


def instance_issues(instance: ProblemInstance) -> list[ValidationIssue]:
    """Collect every invariant violation, each with a path to the field."""
    issues: list[ValidationIssue] = []

    def bad(code: str, path: str, message: str) -> None:
        issues.append(ValidationIssue(code, path, message))

    j_count = len(instance.computers)
    for idx, comp in enumerate(instance.computers):
        path = f"computers[{idx}]"
        if comp.id != idx + 1:
            bad("ShapeError", path + ".id", f"expected id {idx + 1}, got {comp.id}")
        if comp.base_qubits < 0:
            bad("CapacityRangeError", path + ".base_qubits", "must be >= 0")
        if comp.deploy_cost < 0:
            bad("NegativeCostError", path + ".deploy_cost", "must be >= 0")
        if comp.compute_cost < 0:
            bad("NegativeCostError", path + ".compute_cost", "must be >= 0")

    def check_table(rows, path, kind):
        if len(rows) != j_count or any(len(r) != j_count for r in rows):
            bad("ShapeError", path, f"must be a {j_count}x{j_count} table")
            return
        for i in range(j_count):
            for j in range(j_count):
                if i == j:
                    continue  # diagonal unused
                v = rows[i][j]
                cell = f"{path}[{i}][{j}]"
                if kind == "capacity" and v <= 0:
                    bad("CapacityRangeError", cell, "link capacity must be > 0")
                elif kind == "fidelity" and not (0 <= v <= 1):
                    bad("FidelityRangeError", cell, f"{format_exact(v)} outside [0, 1]")
                elif kind == "cost" and v < 0:
                    bad("NegativeCostError", cell, "must be >= 0")

    check_table(instance.links.capacity, "links.capacity", "capacity")
    check_table(instance.links.base_fidelity, "links.base_fidelity", "fidelity")
    check_table(instance.links.bell_cost, "links.bell_cost", "cost")

    for idx, offer in enumerate(instance.offers):
        path = f"on_demand[{idx}]"
        if offer.id != idx + 1:
            bad("ShapeError", path + ".id", f"expected id {idx + 1}, got {offer.id}")
        if offer.capacity < 0:
            bad("CapacityRangeError", path + ".capacity", "must be >= 0")
        if offer.cost < 0:
            bad("NegativeCostError", path + ".cost", "must be >= 0")

    prob_sum = Fraction(0)
    for idx, scen in enumerate(instance.scenarios):
        path = f"scenarios[{idx}]"
        if scen.id != idx + 1:
            bad("ShapeError", path + ".id", f"expected id {idx + 1}, got {scen.id}")
        if not (0 <= scen.probability <= 1):
            bad(
                "ProbabilityRangeError",
                path + ".probability",
                f"{format_exact(scen.probability)} outside [0, 1]",
            )
        prob_sum += scen.probability
        if scen.demand_qubits is not None:
            if scen.demand_qubits < 0:
                bad("ShapeError", path + ".demand_qubits", "must be >= 0 or absent")
            elif scen.demand_qubits > MAX_DEMAND_QUBITS:
                bad(
                    "DemandTooLarge",
                    path + ".demand_qubits",
                    f"{scen.demand_qubits} exceeds {MAX_DEMAND_QUBITS}",
                )
        if len(scen.power) != j_count:
            bad("ShapeError", path + ".power", f"must have length {j_count}")
        elif any(p < 0 for p in scen.power):
            bad("CapacityRangeError", path + ".power", "entries must be >= 0")
        fid = scen.fidelity
        if len(fid) != j_count or any(len(r) != j_count for r in fid):
            bad("ShapeError", path + ".fidelity", f"must be a {j_count}x{j_count} table")
        else:
            for i in range(j_count):
                for j in range(j_count):
                    if i != j and not (0 <= fid[i][j] <= 1):
                        bad(
                            "FidelityRangeError",
                            f"{path}.fidelity[{i}][{j}]",
                            f"{format_exact(fid[i][j])} outside [0, 1]",
                        )

    if instance.scenarios and prob_sum != 1:
        bad(
            "ProbabilitySumError",
            "scenarios[*].probability",
            f"probabilities sum to {format_exact(prob_sum)}, expected 1",
        )
    return issues


def validate_instance(instance: ProblemInstance) -> ProblemInstance:
    """Return the instance if every invariant holds, else raise with all issues."""
    issues = instance_issues(instance)
    if issues:
        raise InvalidInstanceError(issues)
    return instance


# ---------------------------------------------------------------------------
# default instance


def _uniform_table(j_count: int, off_diagonal, diagonal):
    return tuple(
        tuple(diagonal if i == j else off_diagonal for j in range(j_count))
        for i in range(j_count)
    )


def default_instance(
    machines: int = 10,
    ondemand_fleet: int = DEFAULT_ONDEMAND_FLEET,
) -> ProblemInstance:
    """The stock ten-machine instance used by the shipped experiments.

    Ten identical machines (deploy 5000, compute 1000), all Bell pairs cost
    450 on links of capacity 257, on-demand units of 127 qubits at 25000.
    Two scenarios: with probability 0.8 a 10-qubit task arrives, every
    machine has 127 usable qubits and perfect fidelity; with probability 0.2
    there is no demand, no available power, and zero fidelity.
    """
    computers = tuple(
        QuantumComputer(id=j + 1, base_qubits=127, deploy_cost=5000, compute_cost=1000)
        for j in range(machines)
    )
    links = LinkTable(
        capacity=_uniform_table(machines, 257, 0),
        base_fidelity=_uniform_table(machines, Fraction(1), Fraction(0)),
        bell_cost=_uniform_table(machines, 450, 0),
    )
    offers = tuple(
        OnDemandOffer(id=r + 1, capacity=127, cost=25000) for r in range(ondemand_fleet)
    )
    busy = Scenario(
        id=1,
        probability=parse_exact("0.8"),
        demand_qubits=10,
        power=(127,) * machines,
        fidelity=_uniform_table(machines, Fraction(1), Fraction(0)),
    )
    idle = Scenario(
        id=2,
        probability=parse_exact("0.2"),
        demand_qubits=None,
        power=(0,) * machines,
        fidelity=_uniform_table(machines, Fraction(0), Fraction(0)),
    )
    return validate_instance(
        ProblemInstance(computers=computers, links=links, offers=offers, scenarios=(busy, idle))
    )


# ---------------------------------------------------------------------------
# JSON serialization (canonical; exact values as decimal strings)


def instance_to_dict(instance: ProblemInstance) -> dict:
    return {
        "computers": [
            {
                "id": c.id,
                "base_qubits": c.base_qubits,
                "deploy_cost": c.deploy_cost,
                "compute_cost": c.compute_cost,
            }
            for c in instance.computers
        ],
        "links": {
            "capacity": [list(row) for row in instance.links.capacity],
            "base_fidelity": [
                [format_exact(v) for v in row] for row in instance.links.base_fidelity
            ],
            "bell_cost": [list(row) for row in instance.links.bell_cost],
        },
        "on_demand": [
            {"id": o.id, "capacity": o.capacity, "cost": o.cost} for o in instance.offers
        ],
        "scenarios": [
            {
                "id": s.id,
                "probability": format_exact(s.probability),
                "demand_qubits": s.demand_qubits,
                "power": list(s.power),
                "fidelity": [[format_exact(v) for v in row] for row in s.fidelity],
            }
            for s in instance.scenarios
        ],
    }


def instance_from_dict(doc: dict) -> ProblemInstance:
    try:
        computers = tuple(
            QuantumComputer(
                id=int(c["id"]),
                base_qubits=int(c["base_qubits"]),
                deploy_cost=int(c["deploy_cost"]),
                compute_cost=int(c["compute_cost"]),
            )
            for c in doc["computers"]
        )
        links = LinkTable(
            capacity=[[int(v) for v in row] for row in doc["links"]["capacity"]],
            base_fidelity=[
                [parse_exact(v) for v in row] for row in doc["links"]["base_fidelity"]
            ],
            bell_cost=[[int(v) for v in row] for row in doc["links"]["bell_cost"]],
        )
        offers = tuple(
            OnDemandOffer(id=int(o["id"]), capacity=int(o["capacity"]), cost=int(o["cost"]))
            for o in doc["on_demand"]
        )
        scenarios = tuple(
            Scenario(
                id=int(s["id"]),
                probability=parse_exact(s["probability"]),
                demand_qubits=None if s.get("demand_qubits") is None else int(s["demand_qubits"]),
                power=[int(p) for p in s["power"]],
                fidelity=[[parse_exact(v) for v in row] for row in s["fidelity"]],
            )
            for s in doc["scenarios"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInstanceError(
            [ValidationIssue("ShapeError", "document", f"malformed instance file: {exc}")]
        ) from exc
    return ProblemInstance(computers=computers, links=links, offers=offers, scenarios=scenarios)


def instance_to_json(instance: ProblemInstance) -> str:
    """Canonical JSON text; emitting the same instance twice is byte-identical."""
    return json.dumps(instance_to_dict(instance), indent=2) + "\n"


def instance_from_json(text: str) -> ProblemInstance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInstanceError(
            [ValidationIssue("ShapeError", "document", f"not valid JSON: {exc}")]
        ) from exc
    if not isinstance(doc, dict):
        raise InvalidInstanceError(
            [ValidationIssue("ShapeError", "document", "top level must be an object")]
        )
    return instance_from_dict(doc)
