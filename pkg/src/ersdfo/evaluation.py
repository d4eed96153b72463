"""Budgeted objective wrapper shared by every optimizer."""
from __future__ import annotations

import math
from typing import Callable


class StopRun(Exception):
    """Raised from inside an evaluation to end the current run."""


class BudgetExhausted(StopRun):
    pass


class TargetReached(StopRun):
    pass


class CountedObjective:
    """Counts evaluations of ``f`` and tracks the best (lowest) value seen.

    A call made when ``count == budget`` raises :class:`BudgetExhausted`
    without evaluating, so the count never exceeds the budget.  When
    ``reached(value)`` is true the call records the value and raises
    :class:`TargetReached`.  ``lo``/``hi`` track the observed value range.
    """

    def __init__(self, f: Callable, budget: int | None = None,
                 reached: Callable[[float], bool] | None = None):
        self.f = f
        self.budget = budget
        self.reached = reached
        self.count = 0
        self.best_value = math.inf
        self.best_point = None
        self.lo = math.inf
        self.hi = -math.inf
        self.hit_target = False
        self.hit_point = None

    @property
    def remaining(self) -> float:
        return math.inf if self.budget is None else self.budget - self.count

    def __call__(self, x) -> float:
        if self.budget is not None and self.count >= self.budget:
            raise BudgetExhausted
        self.count += 1
        v = float(self.f(x))
        if v < self.best_value:
            self.best_value, self.best_point = v, x
        self.lo = min(self.lo, v)
        self.hi = max(self.hi, v)
        if self.reached is not None and self.reached(v):
            self.hit_target = True
            self.hit_point = x
            raise TargetReached
        return v

    @property
    def final_point(self):
        """The point that met the target if any, else the best point."""
        return self.hit_point if self.hit_target else self.best_point


def target_predicate(target: float | None, tol: float, rule: str = "below"):
    """``below``: f <= target + tol.  ``near``: |f - target| <= tol."""
    if target is None:
        return None
    if rule == "below":
        return lambda v: v <= target + tol
    if rule == "near":
        return lambda v: abs(v - target) <= tol
    raise ValueError(f"unknown target rule {rule!r}")
