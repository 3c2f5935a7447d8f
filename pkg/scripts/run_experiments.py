#!/usr/bin/env python3
"""Run every shipped experiment on the built-in instance.

Five parameter sweeps (task demand, machine power, link fidelity,
on-demand cost, demand probability) plus the policy comparison; each
writes fig_<name>.csv and fig_<name>.svg into --out-dir.  Reruns are
byte-identical.
"""

from __future__ import annotations

import argparse
import os
import sys

from qalloc import default_instance, run_all


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results", metavar="DIR")
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="parallel sweep points (default: machine parallelism or QALLOC_THREADS)",
    )
    parser.add_argument(
        "--seeds",
        metavar="LIST",
        default=None,
        help="comma-separated random-policy seeds for the comparison (default: 0..99)",
    )
    args = parser.parse_args(argv)
    threads = args.threads
    if threads is None:
        env = os.environ.get("QALLOC_THREADS", "")
        threads = int(env) if env.isdigit() else (os.cpu_count() or 1)
    seeds = None
    if args.seeds is not None:
        seeds = tuple(int(s) for s in args.seeds.split(",") if s.strip())
    written = run_all(
        default_instance(),
        args.out_dir,
        threads=max(1, threads),
        seeds=seeds,
    )
    for name in sorted(written):
        print(f"wrote {written[name]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
