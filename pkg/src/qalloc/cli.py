"""Command line interface.

Exit codes: 0 on success, 1 when a requested solve is infeasible (the
report is still written), 2 for usage errors, invalid input files, and
I/O failures.  Every result file is a pure function of (instance file,
command line, seed list); outputs are written atomically.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .engine import InstanceTooLarge, solve
from .experiments import (
    AXES,
    AxisDomainError,
    COMPARISON_AXIS,
    DEFAULT_COMPARISON_SEEDS,
    SweepSpec,
    comparison_to_json,
    default_spec,
    render_charts,
    run_comparison,
    run_sweep,
    sweep_to_json,
    write_text,
)
from .model import (
    InvalidInstanceError,
    ProblemInstance,
    default_instance,
    instance_from_json,
    instance_issues,
    instance_to_json,
    parse_exact,
)

USAGE_ERROR = 2
INFEASIBLE = 1

#: Short axis names accepted on the command line.
_AXIS_ALIASES = {"demand": "demand_qubits"}
_INT_AXES = ("demand_qubits", "power", "ondemand_cost")


class _CliError(Exception):
    pass


def _load_instance(path: str | None) -> ProblemInstance:
    if path is None:
        return default_instance()
    try:
        with open(path, "r") as handle:
            text = handle.read()
    except OSError as exc:
        raise _CliError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return instance_from_json(text)


def emit_default_instance(path: str) -> None:
    """Write the built-in instance as canonical JSON (atomically)."""
    try:
        write_text(path, instance_to_json(default_instance()))
    except OSError as exc:
        raise _CliError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        write_text(output, text)


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("QALLOC_THREADS", "")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _canonical_axis(name: str) -> str:
    return _AXIS_ALIASES.get(name, name)


def _parse_values(axis: str, text: str) -> tuple:
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        raise AxisDomainError("empty value list")
    if axis in _INT_AXES:
        return tuple(int(item) for item in items)
    return tuple(parse_exact(item) for item in items)


def _parse_seeds(text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    return tuple(int(item.strip()) for item in text.split(",") if item.strip())


def _write_docs(out_dir: str, docs: dict[str, str]) -> None:
    for name, text in docs.items():
        write_text(os.path.join(out_dir, name), text)


def _cmd_solve(args) -> int:
    if args.default and args.instance:
        raise _CliError("--default and --instance are mutually exclusive")
    instance = _load_instance(args.instance)
    if args.model == "deterministic":
        from .formulation import build_deterministic

        demand = args.demand
        if demand is None:
            demand = instance.scenarios[0].demand_qubits if instance.scenarios else None
        problem = build_deterministic(instance, demand)
    else:
        from .formulation import build_extensive_form

        problem = build_extensive_form(instance)
    report = solve(problem, args.solver)
    _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.output)
    return 0 if report.solution.status == "optimal" else INFEASIBLE


def _cmd_sweep(args) -> int:
    instance = _load_instance(args.instance)
    axis = _canonical_axis(args.axis)
    if args.values:
        spec = SweepSpec(axis=axis, values=_parse_values(axis, args.values), base=instance)
    else:
        spec = default_spec(instance, axis)
    oracle = {"auto": None, "on": True, "off": False}[args.oracle]
    rows = run_sweep(spec, solver=args.solver, oracle=oracle, threads=_threads(args))
    docs = render_charts(rows)
    if args.format == "json":
        docs = {
            name.replace(".csv", ".json"): (
                sweep_to_json(rows) if name.endswith(".csv") else text
            )
            for name, text in docs.items()
        }
    _write_docs(args.out_dir, docs)
    return 0


def _cmd_compare(args) -> int:
    instance = _load_instance(args.instance)
    multipliers = (
        tuple(parse_exact(item.strip()) for item in args.multipliers.split(",") if item.strip())
        if args.multipliers
        else None
    )
    seeds = _parse_seeds(args.seeds)
    spec = default_spec(instance, COMPARISON_AXIS, seeds=seeds)
    if multipliers is not None:
        spec = SweepSpec(
            axis=COMPARISON_AXIS, values=multipliers, base=instance, seeds=spec.seeds
        )
    rows = run_comparison(spec, evf_mode=args.evf_mode)
    docs = render_charts(rows)
    if args.format == "json":
        docs = {
            name.replace(".csv", ".json"): (
                comparison_to_json(rows) if name.endswith(".csv") else text
            )
            for name, text in docs.items()
        }
    _write_docs(args.out_dir, docs)
    return 0


def _cmd_validate(args) -> int:
    path = args.path if args.path is not None else args.instance
    try:
        instance = _load_instance(path)
    except InvalidInstanceError as exc:
        for issue in exc.issues:
            sys.stderr.write(f"{issue}\n")
        return USAGE_ERROR
    issues = instance_issues(instance)
    if issues:
        for issue in issues:
            sys.stderr.write(f"{issue}\n")
        return USAGE_ERROR
    sys.stdout.write(
        f"ok: {instance.machine_count} machines, {len(instance.offers)} offers, "
        f"{len(instance.scenarios)} scenarios\n"
    )
    return 0


def _cmd_default_instance(args) -> int:
    if args.output and args.machines == 10 and args.ondemand == 32:
        emit_default_instance(args.output)
        return 0
    instance = default_instance(machines=args.machines, ondemand_fleet=args.ondemand)
    _emit(instance_to_json(instance), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qalloc",
        description="Exact provisioning planner for distributed quantum computing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_instance(p):
        p.add_argument(
            "--instance",
            metavar="FILE",
            help="instance JSON (omit to use the built-in ten-machine instance)",
        )

    def add_format(p):
        p.add_argument(
            "--format",
            choices=("csv", "json"),
            default="csv",
            help="tabular artifact format (SVG charts are always written)",
        )

    def add_out(p):
        p.add_argument(
            "--out",
            "--out-dir",
            dest="out_dir",
            default="results",
            metavar="DIR",
            help="output directory (created on demand; default: results)",
        )

    p = sub.add_parser("solve", help="solve one instance and print a JSON report")
    add_instance(p)
    p.add_argument(
        "--default",
        action="store_true",
        help="solve the built-in instance (same as omitting --instance)",
    )
    p.add_argument(
        "--model",
        choices=("stochastic", "deterministic"),
        default="stochastic",
        help="two-stage stochastic model (default) or the single-stage model",
    )
    p.add_argument(
        "--demand",
        type=int,
        help="task demand in qubits for the deterministic model "
        "(default: first scenario's demand)",
    )
    p.add_argument(
        "--solver",
        choices=("branch_and_bound", "bnb", "exhaustive"),
        default="branch_and_bound",
    )
    p.add_argument("--output", metavar="FILE", help="write the report here instead of stdout")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("sweep", help="sweep one axis and write CSV plus SVG artifacts")
    add_instance(p)
    p.add_argument(
        "--axis",
        choices=tuple(_AXIS_ALIASES) + AXES,
        required=True,
        help="swept quantity ('demand' is shorthand for demand_qubits)",
    )
    p.add_argument(
        "--values",
        metavar="LIST",
        help="comma-separated axis values (default: the built-in grid)",
    )
    p.add_argument(
        "--solver",
        choices=("branch_and_bound", "bnb", "exhaustive"),
        default="branch_and_bound",
    )
    p.add_argument(
        "--oracle",
        choices=("auto", "on", "off"),
        default="auto",
        help="cross-check every point against the exhaustive solver",
    )
    p.add_argument(
        "--threads",
        type=int,
        help="points solved in parallel (default: machine parallelism, "
        "or QALLOC_THREADS)",
    )
    add_format(p)
    add_out(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("compare", help="score policies across on-demand price multipliers")
    add_instance(p)
    p.add_argument("--multipliers", metavar="LIST", help="comma-separated multipliers")
    p.add_argument(
        "--seeds",
        metavar="LIST",
        help="comma-separated random-policy seeds (default: 0..99)",
    )
    p.add_argument("--evf-mode", choices=("bits", "qubits"), default="bits")
    add_format(p)
    add_out(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("validate", help="check an instance file and report every issue")
    p.add_argument("path", nargs="?", metavar="FILE", help="instance JSON to check")
    add_instance(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("default-instance", help="print the built-in instance as JSON")
    p.add_argument("--machines", type=int, default=10)
    p.add_argument("--ondemand", type=int, default=32, help="on-demand fleet size")
    p.add_argument("--output", metavar="FILE")
    p.set_defaults(func=_cmd_default_instance)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidInstanceError as exc:
        for issue in exc.issues:
            sys.stderr.write(f"{issue}\n")
        return USAGE_ERROR
    except (AxisDomainError, InstanceTooLarge, ValueError, OSError, _CliError) as exc:
        sys.stderr.write(f"qalloc: {exc}\n")
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
