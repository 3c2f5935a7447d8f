from __future__ import annotations

import random
from fractions import Fraction

import pytest

from qalloc import (
    AXES,
    COMPARISON_AXIS,
    AxisDomainError,
    SweepSpec,
    apply_axis,
    branch_and_bound,
    build_extensive_form,
    comparison_to_csv,
    default_spec,
    render_charts,
    run_comparison,
    run_sweep,
    sweep_to_csv,
    sweep_to_json,
)
from qalloc.experiments import AXIS_LABELS, DEFAULT_GRIDS, SWEEP_COLUMNS

from conftest import random_instance


def test_axis_catalog():
    assert AXES == ("demand_qubits", "power", "fidelity", "ondemand_cost", "probability")
    assert set(DEFAULT_GRIDS) == set(AXES)
    assert DEFAULT_GRIDS["demand_qubits"] == (6, 7, 8, 9, 10, 11)
    assert DEFAULT_GRIDS["ondemand_cost"] == (5000, 12500, 25000, 50000, 75000)
    assert len(DEFAULT_GRIDS["fidelity"]) == len(DEFAULT_GRIDS["probability"]) == 11
    assert set(AXIS_LABELS) == set(AXES)


def test_apply_axis_leaves_idle_scenario_alone(default_inst):
    idle = default_inst.scenarios[1]
    for axis, value in (
        ("demand_qubits", 7),
        ("power", 200),
        ("fidelity", Fraction(3, 10)),
        ("ondemand_cost", 12500),
    ):
        swept = apply_axis(default_inst, axis, value)
        assert swept.scenarios[1] == idle, axis
    swept = apply_axis(default_inst, "probability", Fraction(3, 10))
    assert swept.scenarios[0].probability == Fraction(3, 10)
    assert swept.scenarios[1].probability == Fraction(7, 10)


def test_apply_axis_identity_and_bits(default_inst):
    assert apply_axis(default_inst, "probability", Fraction(4, 5)) == default_inst
    swept = apply_axis(default_inst, "demand_qubits", 11)
    assert swept.scenarios[0].demand_bits == 2048


def test_apply_axis_semantics(default_inst):
    swept = apply_axis(default_inst, "demand_qubits", 7)
    assert swept.scenarios[0].demand_qubits == 7
    swept = apply_axis(default_inst, "power", 96)
    assert set(swept.scenarios[0].power) == {96}
    swept = apply_axis(default_inst, "fidelity", Fraction(1, 2))
    assert swept.scenarios[0].fidelity[0][1] == Fraction(1, 2)
    assert swept.scenarios[0].fidelity[0][0] == 0
    swept = apply_axis(default_inst, "ondemand_cost", 5000)
    assert all(o.cost == 5000 for o in swept.offers)
    assert all(o.capacity == 127 for o in swept.offers)


def test_apply_axis_domain_errors(default_inst):
    with pytest.raises(AxisDomainError):
        apply_axis(default_inst, "demand_qubits", -1)
    with pytest.raises(AxisDomainError):
        apply_axis(default_inst, "demand_qubits", 63)
    with pytest.raises(AxisDomainError):
        apply_axis(default_inst, "fidelity", Fraction(11, 10))
    with pytest.raises(AxisDomainError):
        apply_axis(default_inst, "probability", Fraction(-1, 10))
    with pytest.raises(AxisDomainError):
        apply_axis(default_inst, "ondemand_cost", -5)
    with pytest.raises(AxisDomainError):
        apply_axis(default_inst, "temperature", 1)


def test_sweep_spec_rejects_unknown_axis(default_inst):
    with pytest.raises(AxisDomainError):
        SweepSpec(axis="temperature", values=(1,), base=default_inst)
    with pytest.raises(AxisDomainError):
        default_spec(default_inst, "temperature")


def test_sweep_spec_checks_value_domains(default_inst):
    with pytest.raises(AxisDomainError):
        SweepSpec(axis="demand_qubits", values=(6, 63), base=default_inst)
    with pytest.raises(AxisDomainError):
        SweepSpec(axis="fidelity", values=(Fraction(3, 2),), base=default_inst)
    with pytest.raises(AxisDomainError):
        SweepSpec(axis="ondemand_cost_comparison", values=(-1,), base=default_inst)
    spec = SweepSpec(axis="fidelity", values=("0.4",), base=default_inst)
    assert spec.values == (Fraction(2, 5),)


def test_demand_sweep_golden(default_inst):
    rows = run_sweep(default_spec(default_inst, "demand_qubits"))
    assert [r.axis_value for r in rows] == [6, 7, 8, 9, 10, 11]
    assert [r.total for r in rows] == [5800, 12320, 19560, 36200, 78120, 230400]
    assert [r.deployed_count for r in rows] == [1, 2, 3, 5, 9, 10]
    assert [r.ondemand_expected for r in rows] == [0] * 5 + [Fraction(28, 5)]
    assert all(r.oracle_total == r.total for r in rows)
    assert all(r.axis == "demand_qubits" for r in rows)


def test_ondemand_cost_sweep_golden(default_inst):
    rows = run_sweep(default_spec(default_inst, "ondemand_cost"))
    assert [r.total for r in rows] == [36000, 75600, 78120, 78120, 78120]
    # cheap on-demand displaces deployment entirely
    assert rows[0].deployed_count == 0
    assert rows[0].expected_ondemand == 36000
    assert rows[2].deployed_count == 9


def test_rows_sorted_by_axis_value(default_inst):
    spec = SweepSpec(axis="demand_qubits", values=(9, 6, 8), base=default_inst)
    rows = run_sweep(spec)
    assert [r.axis_value for r in rows] == [6, 8, 9]


def test_threads_do_not_change_results(default_inst):
    spec = SweepSpec(axis="demand_qubits", values=(6, 7, 8), base=default_inst)
    serial = run_sweep(spec, threads=1)
    parallel = run_sweep(spec, threads=3)
    assert serial == parallel


def test_breakdown_sums_to_total_on_every_row(default_inst):
    for axis in AXES:
        for row in run_sweep(default_spec(default_inst, axis)):
            assert (
                row.deployment_cost
                + row.expected_compute
                + row.expected_bell
                + row.expected_ondemand
                == row.total
            ), (axis, row.axis_value)


def test_monotonicity_on_random_perturbations():
    rng = random.Random(777)
    for _ in range(50):
        inst = random_instance(rng, max_machines=4, max_scenarios=2, max_offers=2)
        lo, hi = sorted(rng.sample(range(0, 9), 2))
        total = {}
        for q in (lo, hi):
            swept = apply_axis(inst, "demand_qubits", q)
            sol = branch_and_bound(build_extensive_form(swept)).solution
            total[q] = sol.cost.total if sol.status == "optimal" else None
        if total[lo] is not None and total[hi] is not None:
            assert total[lo] <= total[hi]
        if total[hi] is not None and total[lo] is None:
            pytest.fail("demand decrease cannot destroy feasibility")


def test_fidelity_monotonicity_on_random_perturbations():
    rng = random.Random(778)
    for _ in range(50):
        inst = random_instance(rng, max_machines=4, max_scenarios=2, max_offers=2)
        lo, hi = sorted((Fraction(rng.randint(0, 10), 10), Fraction(rng.randint(0, 10), 10)))
        total = {}
        for q in (lo, hi):
            swept = apply_axis(inst, "fidelity", q)
            sol = branch_and_bound(build_extensive_form(swept)).solution
            total[q] = sol.cost.total if sol.status == "optimal" else None
        # higher fidelity relaxes constraints: never more expensive
        if total[lo] is not None and total[hi] is not None:
            assert total[hi] <= total[lo]
        if total[lo] is not None and total[hi] is None:
            pytest.fail("fidelity increase cannot destroy feasibility")


def test_sweep_csv_layout(default_inst):
    spec = SweepSpec(axis="demand_qubits", values=(6, 11), base=default_inst)
    rows = run_sweep(spec)
    text = sweep_to_csv(rows)
    lines = text.splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    first = lines[1].split(",")
    assert first[0] == "demand_qubits"
    assert first[1] == "6"
    assert first[6] == "5800"
    last = lines[2].split(",")
    assert last[8] == "5.6"  # expected on-demand units as exact decimal
    assert last[11] == "230400"  # oracle cross-check column


def test_sweep_json_matches_csv_fields(default_inst):
    import json

    spec = SweepSpec(axis="demand_qubits", values=(6,), base=default_inst)
    rows = run_sweep(spec)
    docs = json.loads(sweep_to_json(rows))
    assert len(docs) == 1
    assert docs[0]["axis_value"] == "6"
    assert docs[0]["total"] == "5800"
    assert list(docs[0]) == list(SWEEP_COLUMNS)


def test_comparison_golden_small_seed_set(default_inst):
    spec = default_spec(default_inst, COMPARISON_AXIS, seeds=range(5))
    rows = run_comparison(spec)
    assert [r.model for r in rows[:3]] == ["proposed", "evf", "random_mean"]
    by = {}
    for r in rows:
        by.setdefault(r.multiplier, {})[r.model] = r
    assert by[Fraction(1, 5)]["proposed"].total_cost == 36000
    assert by[Fraction(1, 5)]["evf"].total_cost == 72200
    assert by[Fraction(1, 2)]["proposed"].total_cost == 75600
    assert by[Fraction(1)]["proposed"].total_cost == 78120
    for mult, models in by.items():
        assert models["proposed"].total_cost <= models["evf"].total_cost
        assert models["proposed"].total_cost <= models["random_mean"].total_cost
        assert models["random_mean"].seed_count == 5
    text = comparison_to_csv(rows)
    header = text.splitlines()[0]
    assert header == "multiplier,model,seed,deployment_count,on_demand_expected,total_cost,feasible"
    assert "5/5" in text


def test_comparison_rejects_non_integral_pricing(default_inst):
    spec = SweepSpec(axis=COMPARISON_AXIS, values=(Fraction(1, 3),), base=default_inst)
    with pytest.raises(AxisDomainError):
        run_comparison(spec)
    with pytest.raises(AxisDomainError):
        run_sweep(spec)


def test_render_charts_sweep(default_inst):
    spec = SweepSpec(axis="demand_qubits", values=(6, 7), base=default_inst)
    rows = run_sweep(spec)
    docs = render_charts(rows)
    assert set(docs) == {"fig_demand.csv", "fig_demand.svg"}
    assert docs["fig_demand.svg"].startswith("<svg")
    assert docs["fig_demand.csv"] == sweep_to_csv(rows)
    again = render_charts(rows)
    assert again == docs  # deterministic


def test_render_charts_power_structure(default_inst):
    rows = run_sweep(default_spec(default_inst, "power"))
    docs = render_charts(rows)
    assert set(docs) == {"fig_power.csv", "fig_power.svg", "fig_power_structure.svg"}


def test_render_charts_comparison(default_inst):
    spec = default_spec(default_inst, COMPARISON_AXIS, seeds=(0,))
    rows = run_comparison(spec)
    docs = render_charts(rows)
    assert set(docs) == {"fig_comparison.csv", "fig_comparison.svg"}
    assert "random mean" in docs["fig_comparison.svg"]


def test_render_charts_rejects_empty():
    with pytest.raises(ValueError):
        render_charts(())
