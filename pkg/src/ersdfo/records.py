"""Per-run result record shared by all optimizers."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field


@dataclass
class RunRecord:
    algorithm: str
    seed: int
    best_value: float
    best_point: list | None
    evals: int
    iterations: int
    stop_reason: str
    classification: str = ""
    trace: list = field(default_factory=list)       # [evals, best value so far] per iteration
    counters: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        if not math.isfinite(d["best_value"]):
            d["best_value"] = None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        d = dict(d)
        if d.get("best_value") is None:
            d["best_value"] = math.inf
        return cls(**d)


def stop_reason_of(exc: BaseException | None, default: str) -> str:
    from .evaluation import BudgetExhausted, TargetReached
    if isinstance(exc, TargetReached):
        return "target"
    if isinstance(exc, BudgetExhausted):
        return "budget"
    return default
