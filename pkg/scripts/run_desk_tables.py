"""Run the builtin experiment specs and print their summary tables.

Usage: python3 scripts/run_desk_tables.py [s2 gr24 gr25 jl] [--full] [--jobs 4] [--out results]
Default is the reduced run count of each spec; --full uses the spec's own run count.
"""
import argparse
import time

from ersdfo.cli import _print_table
from ersdfo.harness import builtin_specs, emit, run_experiment, summarize


def main():
    specs = builtin_specs()
    ap = argparse.ArgumentParser()
    ap.add_argument("names", nargs="*", default=list(specs))
    ap.add_argument("--full", action="store_true")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    for name in args.names:
        spec = specs[name]
        runs = spec.runs if args.full else spec.desk_runs
        t0 = time.perf_counter()
        records = run_experiment(spec, jobs=args.jobs, runs=runs)
        emit(f"{args.out}/{name}", spec, records)
        print(f"== {name}: {runs} runs, budget {spec.budget}, {time.perf_counter() - t0:.0f}s")
        _print_table(summarize(records, spec.objective), spec.objective)
        print()


if __name__ == "__main__":
    main()
