"""Command line entry point: ``python -m ersdfo {run,list-specs,summarize}``."""
from __future__ import annotations

import argparse
import sys
import time

from .harness import (
    ConfigError,
    builtin_specs,
    emit,
    load_records,
    load_spec,
    run_experiment,
    summarize,
)


def _print_table(rows, objective):
    from .harness import class_names
    classes = list(class_names(objective))
    header = ["label", "runs", *classes, "avg_evals"]
    widths = [max(len(str(h)), *(len(str(r.get(h, 0))) for r in rows)) for h in header]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for r in rows:
        print("  ".join(str(r.get(h, 0)).ljust(w) for h, w in zip(header, widths)))


def cmd_run(args) -> int:
    try:
        spec = load_spec(args.spec)
        spec.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    runs = args.runs if args.runs is not None else (spec.desk_runs if args.desk else None)
    if runs is not None and runs < 1:
        print("config error: --runs must be >= 1", file=sys.stderr)
        return 2
    out = args.out or f"results/{spec.name}"
    t0 = time.perf_counter()
    records = run_experiment(spec, jobs=args.jobs, runs=runs, seed_base=args.seed)
    if runs is not None or args.seed is not None:
        from dataclasses import replace
        spec = replace(spec, runs=runs or spec.runs,
                       seed_base=spec.seed_base if args.seed is None else args.seed)
    emit(out, spec, records)
    _print_table(summarize(records, spec.objective), spec.objective)
    print(f"wrote {out}/ in {time.perf_counter() - t0:.1f}s")
    return 0


def cmd_list(args) -> int:
    for name, s in builtin_specs().items():
        labels = ", ".join(e.label for e in s.entries)
        print(f"{name:5s} objective={s.objective} runs={s.runs} (desk {s.desk_runs}) "
              f"budget={s.budget}: {labels}")
    return 0


def cmd_summarize(args) -> int:
    try:
        payload, records = load_records(args.records)
    except (OSError, ValueError, KeyError) as exc:
        print(f"cannot read {args.records}: {exc}", file=sys.stderr)
        return 2
    _print_table(summarize(records, payload["spec"]["objective"]), payload["spec"]["objective"])
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ersdfo", description="Riemannian derivative-free optimization experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a builtin spec or a TOML config file")
    r.add_argument("spec", help="builtin spec name (see list-specs) or path to a .toml file")
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--out", default=None, help="output directory (default results/<spec>)")
    r.add_argument("--seed", type=int, default=None, help="seed base override")
    r.add_argument("--runs", type=int, default=None, help="number of runs override")
    r.add_argument("--desk", action="store_true", help="reduced 50-run preset")
    r.set_defaults(func=cmd_run)
    ls = sub.add_parser("list-specs", help="list builtin specs")
    ls.set_defaults(func=cmd_list)
    sm = sub.add_parser("summarize", help="print the summary table of a records.json")
    sm.add_argument("records")
    sm.set_defaults(func=cmd_summarize)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
