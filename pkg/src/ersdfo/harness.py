"""Experiment specs, multi-run execution, classification and file output."""
from __future__ import annotations

import csv
import datetime as _dt
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .baselines import RunLimits, run_rcmaes_record, run_rpso_record, run_rtr_record
from .benchmarks import Objective, make_objective, random_initial
from .core import CoreSpec
from .extended import ExtendedConfig, ExtendedRSDFO
from .records import RunRecord

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

ALGORITHMS = ("ext-rsdfo", "rcmaes", "rtr", "rpso")
DESK_RUNS = 50


class ConfigError(ValueError):
    pass


@dataclass
class AlgorithmEntry:
    label: str
    algorithm: str
    params: dict = field(default_factory=dict)


@dataclass
class ExperimentSpec:
    name: str
    objective: str
    runs: int
    budget: int
    entries: list
    seed_base: int = 0
    n_init: int = 2
    init_bounds: tuple = (-30, 30)
    desk_runs: int = DESK_RUNS
    ladder_R: float = 2.0
    ladder_r: float = 0.5

    def validate(self) -> None:
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.budget < 1:
            raise ConfigError("budget must be >= 1")
        if self.n_init < 1:
            raise ConfigError("n_init must be >= 1")
        try:
            make_objective(self.objective, self.ladder_R, self.ladder_r)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad objective {self.objective!r}: {exc}") from None
        if not self.entries:
            raise ConfigError("no algorithms configured")
        labels = set()
        for e in self.entries:
            if e.algorithm not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {e.algorithm!r}")
            if e.label in labels:
                raise ConfigError(f"duplicate label {e.label!r}")
            labels.add(e.label)
            unknown = set(e.params) - set(ALLOWED_PARAMS[e.algorithm])
            if unknown:
                raise ConfigError(f"{e.label}: unknown parameters {sorted(unknown)}")
            if e.algorithm == "ext-rsdfo":
                try:
                    ext_config(self, e).validate()
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"{e.label}: {exc}") from None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["init_bounds"] = list(self.init_bounds)
        return d


ALLOWED_PARAMS = {
    "ext-rsdfo": ("eps_b", "n_random", "n_cull", "mc_samples", "core", "core_m1", "core_m2",
                  "tau_a", "tau_b", "tau_floor", "n_pick", "n_per", "mc_seeds", "mode", "eps0"),
    "rcmaes": ("m1",),
    "rtr": (),
    "rpso": ("copies",),
}


def ext_config(spec: ExperimentSpec, entry: AlgorithmEntry) -> ExtendedConfig:
    p = dict(entry.params)
    ob = make_objective(spec.objective, spec.ladder_R, spec.ladder_r)
    core = CoreSpec(p.pop("core", "generic"), int(p.pop("core_m1", 50)), int(p.pop("core_m2", 10)))
    return ExtendedConfig(n_init=spec.n_init, budget=spec.budget, core=core, target=ob.target,
                          tol=ob.tol, target_rule=ob.target_rule, **p)


def _ext(label, eps_b, m1, m2, mc, n_random, n_cull):
    return AlgorithmEntry(label, "ext-rsdfo", {"eps_b": eps_b, "core_m1": m1, "core_m2": m2,
                                               "mc_samples": mc, "n_random": n_random,
                                               "n_cull": n_cull})


def builtin_specs() -> dict:
    """The four reference experiment setups."""
    s2 = ExperimentSpec("s2", "sphere", runs=200, budget=10_000, n_init=2, entries=[
        _ext("ext-rsdfo(eps_b=1)", 1.0, 50, 10, 10, 2, 2),
        AlgorithmEntry("rcmaes", "rcmaes", {"m1": 40}),
        AlgorithmEntry("rpso", "rpso", {"copies": 10}),
        AlgorithmEntry("rtr", "rtr"),
        _ext("ext-rsdfo(eps_b=0.4)", 0.4, 50, 10, 10, 2, 2),
    ])
    gr24 = ExperimentSpec("gr24", "grassmann-2-4", runs=100, budget=24_000, n_init=2, entries=[
        _ext("ext-rsdfo(eps_b=1)", 1.0, 120, 40, 40, 2, 2),
        AlgorithmEntry("rcmaes", "rcmaes", {"m1": 80}),
        AlgorithmEntry("rpso", "rpso", {"copies": 20}),
        AlgorithmEntry("rtr", "rtr"),
        _ext("ext-rsdfo(eps_b=0.5)", 0.5, 120, 40, 40, 2, 2),
    ])
    gr25 = ExperimentSpec("gr25", "grassmann-2-5", runs=100, budget=40_000, n_init=2, entries=[
        _ext("ext-rsdfo(eps_b=1)", 1.0, 200, 50, 50, 2, 2),
        AlgorithmEntry("rcmaes", "rcmaes", {"m1": 80}),
        AlgorithmEntry("rpso", "rpso", {"copies": 20}),
        AlgorithmEntry("rtr", "rtr"),
        _ext("ext-rsdfo(eps_b=0.5)", 0.5, 200, 50, 50, 2, 2),
    ])
    jl = ExperimentSpec("jl", "ladder", runs=100, budget=20_000, n_init=5, entries=[
        _ext("ext-rsdfo", 1.0, 50, 10, 10, 6, 3),
        AlgorithmEntry("rcmaes", "rcmaes", {"m1": 40}),
        AlgorithmEntry("rtr", "rtr"),
        AlgorithmEntry("rpso", "rpso", {"copies": 8}),
    ])
    return {s.name: s for s in (s2, gr24, gr25, jl)}


def spec_from_dict(d: dict) -> ExperimentSpec:
    d = dict(d)
    try:
        raw_entries = d.pop("algorithms")
    except KeyError:
        raise ConfigError("config needs at least one [[algorithms]] table") from None
    entries = []
    for a in raw_entries:
        a = dict(a)
        try:
            algo = a.pop("algorithm")
        except KeyError:
            raise ConfigError("every [[algorithms]] table needs 'algorithm'") from None
        entries.append(AlgorithmEntry(a.pop("label", algo), algo, a))
    if "init_bounds" in d:
        d["init_bounds"] = tuple(d["init_bounds"])
    try:
        spec = ExperimentSpec(entries=entries, **d)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    spec.validate()
    return spec


def load_spec(name_or_path: str) -> ExperimentSpec:
    specs = builtin_specs()
    if name_or_path in specs:
        return specs[name_or_path]
    path = Path(name_or_path)
    if not path.is_file():
        raise ConfigError(f"no builtin spec or file named {name_or_path!r}")
    try:
        data = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return spec_from_dict(data)


# --- running -------------------------------------------------------------------

def initial_points(spec: ExperimentSpec, ob: Objective, seed: int):
    """Shared start set for one seed, plus the single start for one-point methods."""
    rng = np.random.default_rng([seed, 7])
    X0 = [random_initial(ob.manifold, rng, spec.init_bounds) for _ in range(spec.n_init)]
    one = X0[int(rng.integers(len(X0)))]
    return X0, one


def run_one(spec: ExperimentSpec, entry: AlgorithmEntry, seed: int) -> RunRecord:
    ob = make_objective(spec.objective, spec.ladder_R, spec.ladder_r)
    M = ob.manifold
    X0, one = initial_points(spec, ob, seed)
    limits = RunLimits(spec.budget, ob.target, ob.tol, ob.target_rule)
    if entry.algorithm == "ext-rsdfo":
        algo = ExtendedRSDFO(M, ob.f, ext_config(spec, entry), seed)
        rec, _ = algo.run(X0)
        counted = algo.counted
    elif entry.algorithm == "rcmaes":
        rec, counted = run_rcmaes_record(M, ob.f, one, limits, seed, int(entry.params.get("m1", 40)))
    elif entry.algorithm == "rtr":
        rec, counted = run_rtr_record(M, ob.f, one, limits, seed)
    elif entry.algorithm == "rpso":
        copies = int(entry.params.get("copies", 10))
        rec, counted = run_rpso_record(M, ob.f, [x for _ in range(copies) for x in X0], limits, seed)
    else:
        raise ConfigError(f"unknown algorithm {entry.algorithm!r}")
    final = counted.final_point
    rec.algorithm = entry.label
    rec.classification = ob.classify(final, counted.best_value) if final is not None else "none"
    if counted.hit_target:
        rec.extra["target_point"] = M.to_list(counted.hit_point)
    return rec


def _task(args):
    spec_dict, index, seed = args
    spec = spec_from_dict(spec_dict)
    return run_one(spec, spec.entries[index], seed).to_dict()


def spec_as_config(spec: ExperimentSpec) -> dict:
    d = spec.to_dict()
    d["algorithms"] = [dict(algorithm=e["algorithm"], label=e["label"], **e["params"])
                       for e in d.pop("entries")]
    return d


def run_experiment(spec: ExperimentSpec, jobs: int = 1, runs: int | None = None,
                   seed_base: int | None = None, labels=None) -> list[RunRecord]:
    """All runs of every entry, ordered by entry then seed."""
    spec.validate()
    if runs is not None or seed_base is not None:
        spec = replace(spec, runs=spec.runs if runs is None else runs,
                       seed_base=spec.seed_base if seed_base is None else seed_base)
    cfg = spec_as_config(spec)
    tasks = [(cfg, i, spec.seed_base + r) for i, e in enumerate(spec.entries)
             if labels is None or e.label in labels for r in range(spec.runs)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(_task, tasks, chunksize=1))
    else:
        out = [_task(t) for t in tasks]
    return [RunRecord.from_dict(d) for d in out]


# --- summaries and files -----------------------------------------------------------

def class_names(objective: str) -> tuple:
    return make_objective(objective).classes


def summarize(records: list[RunRecord], objective: str) -> list[dict]:
    classes = class_names(objective)
    rows = {}
    for r in records:
        row = rows.setdefault(r.algorithm, {"label": r.algorithm, "runs": 0, "evals": 0,
                                            **{c: 0 for c in classes}})
        row["runs"] += 1
        row["evals"] += r.evals
        row[r.classification] = row.get(r.classification, 0) + 1
    out = []
    for row in rows.values():
        row["avg_evals"] = round(row.pop("evals") / row["runs"], 3)
        out.append(row)
    return out


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (np.floating,)):
        return _clean(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def records_payload(spec: ExperimentSpec, records: list[RunRecord], timestamp: str | None = None) -> dict:
    return {
        "metadata": {"timestamp": timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat()},
        "spec": _clean(spec_as_config(spec)),
        "records": [_clean(r.to_dict()) for r in records],
    }


def dumps_records(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=1) + "\n"


def emit(out_dir, spec: ExperimentSpec, records: list[RunRecord], timestamp: str | None = None) -> dict:
    """Write records.json, summary.csv, runs.csv and trace_<seed>.csv files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"records": out / "records.json", "summary": out / "summary.csv", "runs": out / "runs.csv"}
    paths["records"].write_text(dumps_records(records_payload(spec, records, timestamp)))
    write_summary_csv(paths["summary"], summarize(records, spec.objective), spec.objective)
    write_runs_csv(paths["runs"], records)
    by_seed: dict[int, list] = {}
    for r in records:
        by_seed.setdefault(r.seed, []).append(r)
    for seed, recs in sorted(by_seed.items()):
        p = out / f"trace_{seed}.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["algorithm", "iteration", "evals", "best"])
            for r in recs:
                for i, (ev, best) in enumerate(r.trace):
                    w.writerow([r.algorithm, i, ev, _fmt(best)])
    return paths


def _fmt(v):
    return "" if v is None or (isinstance(v, float) and not math.isfinite(v)) else repr(float(v))


def write_summary_csv(path, rows: list[dict], objective: str) -> None:
    classes = list(class_names(objective))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "runs", *classes, "avg_evals"])
        for r in rows:
            w.writerow([r["label"], r["runs"], *[r.get(c, 0) for c in classes], r["avg_evals"]])


def write_runs_csv(path, records: list[RunRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["algorithm", "seed", "class", "best", "evals", "stop_reason"])
        for r in records:
            w.writerow([r.algorithm, r.seed, r.classification, _fmt(r.best_value), r.evals,
                        r.stop_reason])


def load_records(path) -> tuple[dict, list[RunRecord]]:
    payload = json.loads(Path(path).read_text())
    return payload, [RunRecord.from_dict(d) for d in payload["records"]]


def default_jobs() -> int:
    return max(1, (os.cpu_count() or 1))
