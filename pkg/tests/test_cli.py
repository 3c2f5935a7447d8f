from __future__ import annotations

import dataclasses
import json
import os

import pytest

from qalloc import default_instance, instance_from_json, instance_to_json
from qalloc.cli import main


def run_cli(capsys, *argv) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_solve_default_prints_total_and_bitmap(capsys):
    code, out, err = run_cli(capsys, "solve", "--default")
    assert code == 0
    assert err == ""
    doc = json.loads(out)
    assert doc["solution"]["cost"]["total"] == "78120"
    assert doc["solution"]["bitmap"] == "1111111110"
    assert "78120" in out and "1111111110" in out


def test_solve_default_conflicts_with_instance(capsys, tmp_path):
    path = tmp_path / "inst.json"
    path.write_text(instance_to_json(default_instance()))
    code, out, err = run_cli(capsys, "solve", "--default", "--instance", str(path))
    assert code == 2
    assert "mutually exclusive" in err


def test_solve_writes_report_file(capsys, tmp_path):
    out_file = tmp_path / "report.json"
    code, out, _ = run_cli(capsys, "solve", "--default", "--output", str(out_file))
    assert code == 0
    assert out == ""
    doc = json.loads(out_file.read_text())
    assert doc["solution"]["cost"]["total"] == "78120"
    assert doc["wall_time_seconds"] == round(doc["wall_time_seconds"], 6)


def test_solve_deterministic_model(capsys):
    code, out, _ = run_cli(capsys, "solve", "--default", "--model", "deterministic", "--demand", "10")
    assert code == 0
    doc = json.loads(out)
    assert doc["solution"]["cost"]["total"] == "86400"
    assert sum(doc["solution"]["deployed"]) == 9


def test_solve_infeasible_exit_code(capsys, tmp_path):
    inst = default_instance()
    busy = dataclasses.replace(inst.scenarios[0], power=(0,) * 10)
    broken = dataclasses.replace(inst, offers=(), scenarios=(busy, inst.scenarios[1]))
    path = tmp_path / "broken.json"
    path.write_text(instance_to_json(broken))
    code, out, _ = run_cli(capsys, "solve", "--instance", str(path))
    assert code == 1
    assert json.loads(out)["solution"]["status"] == "infeasible"


def test_solver_flags_agree(capsys):
    _, out_a, _ = run_cli(capsys, "solve", "--default", "--solver", "bnb")
    _, out_b, _ = run_cli(capsys, "solve", "--default", "--solver", "exhaustive")
    assert json.loads(out_a)["solution"] == json.loads(out_b)["solution"]


def test_missing_instance_file(capsys):
    code, _, err = run_cli(capsys, "solve", "--instance", "no-such-file.json")
    assert code == 2
    assert "no-such-file.json" in err


def test_sweep_artifacts(capsys, tmp_path):
    out_dir = tmp_path / "results"
    code, _, _ = run_cli(
        capsys,
        "sweep", "--axis", "demand", "--values", "6,7,8,9,10,11",
        "--out", str(out_dir), "--threads", "2",
    )
    assert code == 0
    assert sorted(os.listdir(out_dir)) == ["fig_demand.csv", "fig_demand.svg"]
    lines = (out_dir / "fig_demand.csv").read_text().splitlines()
    assert len(lines) == 7
    assert lines[1].split(",")[6] == "5800"
    assert lines[6].split(",")[6] == "230400"


def test_sweep_json_format(capsys, tmp_path):
    out_dir = tmp_path / "results"
    code, _, _ = run_cli(
        capsys,
        "sweep", "--axis", "demand", "--values", "6", "--format", "json",
        "--out", str(out_dir), "--threads", "1",
    )
    assert code == 0
    assert sorted(os.listdir(out_dir)) == ["fig_demand.json", "fig_demand.svg"]
    docs = json.loads((out_dir / "fig_demand.json").read_text())
    assert docs[0]["total"] == "5800"


def test_sweep_rerun_byte_identical(capsys, tmp_path):
    args = ("sweep", "--axis", "probability", "--values", "0.2,0.8", "--threads", "1")
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    assert run_cli(capsys, *args, "--out", str(a_dir))[0] == 0
    assert run_cli(capsys, *args, "--out", str(b_dir))[0] == 0
    for name in os.listdir(a_dir):
        assert (a_dir / name).read_bytes() == (b_dir / name).read_bytes()


def test_sweep_bad_value_exit_code(capsys, tmp_path):
    code, _, err = run_cli(
        capsys, "sweep", "--axis", "demand", "--values", "70", "--out", str(tmp_path)
    )
    assert code == 2
    assert "demand" in err


def test_compare_artifacts(capsys, tmp_path):
    out_dir = tmp_path / "cmp"
    code, _, _ = run_cli(
        capsys,
        "compare", "--multipliers", "0.2,1", "--seeds", "0,1", "--out", str(out_dir),
    )
    assert code == 0
    assert sorted(os.listdir(out_dir)) == ["fig_comparison.csv", "fig_comparison.svg"]
    text = (out_dir / "fig_comparison.csv").read_text()
    assert "proposed" in text and "evf" in text and "random_mean" in text
    assert "36000" in text  # proposed at multiplier 0.2


def test_validate_positional_good_and_bad(capsys, tmp_path):
    good = tmp_path / "good.json"
    good.write_text(instance_to_json(default_instance()))
    code, out, _ = run_cli(capsys, "validate", str(good))
    assert code == 0
    assert out.startswith("ok: 10 machines")

    doc = json.loads(good.read_text())
    doc["scenarios"][1]["probability"] = "0.3"  # sums to 1.1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, _, err = run_cli(capsys, "validate", str(bad))
    assert code == 2
    assert "probability" in err


def test_validate_rejects_malformed_json(capsys, tmp_path):
    path = tmp_path / "garbage.json"
    path.write_text("{not json")
    code, _, err = run_cli(capsys, "validate", str(path))
    assert code == 2
    assert err


def test_default_instance_round_trip(capsys, tmp_path):
    first = tmp_path / "one.json"
    second = tmp_path / "two.json"
    assert run_cli(capsys, "default-instance", "--output", str(first))[0] == 0
    assert run_cli(capsys, "default-instance", "--output", str(second))[0] == 0
    assert first.read_bytes() == second.read_bytes()
    assert instance_from_json(first.read_text()) == default_instance()
    code, out, _ = run_cli(capsys, "solve", "--instance", str(first))
    assert code == 0
    assert json.loads(out)["solution"]["cost"]["total"] == "78120"


def test_default_instance_stdout(capsys):
    code, out, _ = run_cli(capsys, "default-instance")
    assert code == 0
    assert instance_from_json(out) == default_instance()


def test_emit_to_bad_path_exits_two(capsys, tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("x")
    code, _, err = run_cli(
        capsys, "default-instance", "--output", str(blocker / "inst.json")
    )
    assert code == 2
    assert str(blocker) in err


def test_threads_env_fallback(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("QALLOC_THREADS", "1")
    out_dir = tmp_path / "env"
    code, _, _ = run_cli(
        capsys, "sweep", "--axis", "demand", "--values", "6", "--out", str(out_dir)
    )
    assert code == 0
    assert (out_dir / "fig_demand.csv").exists()
