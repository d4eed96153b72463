"""Comparison optimizers: Riemannian trust region, Riemannian PSO and a
stand-alone Riemannian CMA-ES run loop."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import STEP_CLIP, CoreSpec, run_core
from .evaluation import CountedObjective, StopRun, target_predicate
from .geometry import GeometryError, Manifold, SamplingStats, from_coords
from .manifolds import JacobsLadder, heuristic_log
from .records import RunRecord, stop_reason_of

# --- Riemannian trust region --------------------------------------------------

GRAD_H = 1e-6
HESS_H = 1e-4


@dataclass(frozen=True)
class RtrState:
    x: object
    fx: float
    Delta: float = math.pi / 8
    Delta_bar: float = math.pi
    rho_prime: float = 0.1
    k: int = 0
    terminated: bool = False
    last_rho: float = float("nan")


def fd_gradient(fc, dim: int, h: float = GRAD_H) -> np.ndarray:
    """Central differences of ``fc`` at the origin; 2*dim evaluations."""
    g = np.empty(dim)
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = h
        g[i] = (fc(e) - fc(-e)) / (2 * h)
    return g


def fd_hessian(fc, dim: int, f0: float, h: float = HESS_H) -> np.ndarray:
    """Central-difference Hessian at the origin; 2*dim**2 evaluations."""
    H = np.empty((dim, dim))
    E = np.eye(dim) * h
    for i in range(dim):
        H[i, i] = (fc(E[i]) - 2 * f0 + fc(-E[i])) / h ** 2
        for j in range(i):
            v = (fc(E[i] + E[j]) - fc(E[i] - E[j]) - fc(-E[i] + E[j]) + fc(-E[i] - E[j])) / (4 * h * h)
            H[i, j] = H[j, i] = v
    return H


def steihaug_cg(g: np.ndarray, H: np.ndarray, Delta: float, tol: float | None = None,
                max_iter: int | None = None):
    """Truncated CG for min g.e + e.H.e/2 with |e| <= Delta.

    Returns ``(eta, hit_boundary)``.
    """
    n = g.size
    max_iter = 2 * n if max_iter is None else max_iter
    gn = np.linalg.norm(g)
    tol = min(0.5, math.sqrt(gn)) * gn if tol is None else tol
    eta = np.zeros(n)
    r = g.copy()
    d = -r
    if gn == 0:
        return eta, False
    for _ in range(max_iter):
        dHd = d @ H @ d
        if dHd <= 0:
            return eta + _to_boundary(eta, d, Delta) * d, True
        alpha = (r @ r) / dHd
        nxt = eta + alpha * d
        if np.linalg.norm(nxt) >= Delta:
            return eta + _to_boundary(eta, d, Delta) * d, True
        r_new = r + alpha * (H @ d)
        eta = nxt
        if np.linalg.norm(r_new) < tol:
            return eta, False
        beta = (r_new @ r_new) / (r @ r)
        d = -r_new + beta * d
        r = r_new
    return eta, False


def _to_boundary(eta, d, Delta):
    """Positive t with |eta + t d| = Delta."""
    a, b, c = d @ d, 2 * eta @ d, eta @ eta - Delta ** 2
    return (-b + math.sqrt(max(b * b - 4 * a * c, 0.0))) / (2 * a)


def rtr_step(M: Manifold, state: RtrState, f) -> RtrState:
    """One trust-region iteration with finite-difference model (minimization)."""
    x = state.x
    frame = M.frame(x)
    dim = M.dim

    def fc(c):
        return f(M.exp(x, from_coords(frame, c)))

    g = fd_gradient(fc, dim)
    if np.linalg.norm(g) < 1e-6:
        return replace(state, terminated=True)
    H = fd_hessian(fc, dim, state.fx)
    eta, on_boundary = steihaug_cg(g, H, state.Delta)
    model_drop = -(g @ eta + 0.5 * eta @ H @ eta)
    if model_drop <= 0:
        Delta = state.Delta / 4
        return replace(state, Delta=Delta, k=state.k + 1, terminated=Delta < 1e-10, last_rho=float("nan"))
    y = M.exp(x, from_coords(frame, eta))
    fy = f(y)
    rho = (state.fx - fy) / model_drop
    Delta = state.Delta
    if rho < 0.25:
        Delta = Delta / 4
    elif rho > 0.75 and on_boundary:
        Delta = min(2 * Delta, state.Delta_bar)
    if rho > state.rho_prime:
        x, fx = y, fy
    else:
        fx = state.fx
    return RtrState(x, fx, Delta, state.Delta_bar, state.rho_prime, state.k + 1,
                    Delta < 1e-10, float(rho))


def run_rtr(M: Manifold, x0, f: CountedObjective, max_iter: int = 10**6, trace=None) -> RtrState:
    state = RtrState(x0, f(x0))
    while not state.terminated and state.k < max_iter:
        state = rtr_step(M, state, f)
        if trace is not None:
            trace.append([f.count, f.best_value])
    return state


# --- Riemannian particle swarm ------------------------------------------------

@dataclass
class Particle:
    x: object
    v: np.ndarray
    best_x: object
    best_f: float


@dataclass
class PsoSwarm:
    particles: list
    gbest_x: object
    gbest_f: float
    c: float = 1.4
    s: float = 1.4
    w_start: float = 0.9
    w_end: float = 0.4
    horizon: int = 1000
    k: int = 0
    log_failures: int = 0
    clipped: int = 0

    def inertia(self, k: int) -> float:
        t = min(1.0, k / max(1, self.horizon - 1))
        return self.w_start + (self.w_end - self.w_start) * t


def _pso_log(M: Manifold, x, y):
    if isinstance(M, JacobsLadder):
        return heuristic_log(M, x, y), False
    try:
        return M.log(x, y), False
    except GeometryError:
        return M.zero_vector(x), True


def init_swarm(M: Manifold, positions, f, rng, horizon: int, **kw) -> PsoSwarm:
    """Particles at ``positions`` with random unit-norm initial velocities."""
    parts = []
    for x in positions:
        v = M.random_tangent(x, rng)
        v = v / M.norm(x, v)
        parts.append(Particle(x, v, x, math.inf))
    swarm = PsoSwarm(parts, None, math.inf, horizon=horizon, **kw)
    for p in parts:
        p.best_f = f(p.x)
        if p.best_f < swarm.gbest_f:
            swarm.gbest_x, swarm.gbest_f = p.x, p.best_f
    return swarm


def pso_step(M: Manifold, swarm: PsoSwarm, f, rng) -> PsoSwarm:
    """Move every particle, then evaluate and update the bests.

    The global best used for the velocity update is the one known at the
    start of the step.
    """
    w = swarm.inertia(swarm.k)
    g_x = swarm.gbest_x
    inj_clip = 0
    moves = []
    for p in swarm.particles:
        a, b = rng.uniform(size=2)
        lp, fail_p = _pso_log(M, p.x, p.best_x)
        lg, fail_g = _pso_log(M, p.x, g_x)
        swarm.log_failures += fail_p + fail_g
        v = w * p.v + swarm.c * a * lp + swarm.s * b * lg
        nv = M.norm(p.x, v)
        limit = STEP_CLIP * M.inj(p.x)
        if nv > limit:
            v = v * (limit / nv)
            inj_clip += 1
        y = M.exp(p.x, v)
        moves.append((p, y, M.transp(p.x, y, v)))
    swarm.clipped += inj_clip
    for p, y, v in moves:
        p.x, p.v = y, v
    for p in swarm.particles:
        fy = f(p.x)
        if fy < p.best_f:
            p.best_x, p.best_f = p.x, fy
            if fy < swarm.gbest_f:
                swarm.gbest_x, swarm.gbest_f = p.x, fy
    swarm.k += 1
    return swarm


# --- run wrappers -------------------------------------------------------------

@dataclass(frozen=True)
class RunLimits:
    budget: int = 10_000
    target: float | None = None
    tol: float = 0.0
    target_rule: str = "below"

    def counted(self, f) -> CountedObjective:
        return CountedObjective(f, self.budget, target_predicate(self.target, self.tol, self.target_rule))


def _finish(name, seed, M, counted, iterations, reason, trace, counters, extra=None):
    bp = counted.best_point
    trace.append([counted.count, counted.best_value])
    return RunRecord(algorithm=name, seed=seed, best_value=counted.best_value,
                     best_point=None if bp is None else M.to_list(bp), evals=counted.count,
                     iterations=iterations, stop_reason=reason, trace=trace,
                     counters=counters, extra=extra or {})


def run_rcmaes_record(M, f, x0, limits: RunLimits, seed: int, m1: int = 40) -> tuple[RunRecord, CountedObjective]:
    counted = limits.counted(f)
    rng = np.random.default_rng([seed, 3])
    stats = SamplingStats()
    trace: list = []
    iters = [0]
    reason = "converged"
    try:
        run_core(M, x0, counted, CoreSpec("rcmaes", m1, max(1, m1 // 4)), rng, stats,
                         trace=_TraceProxy(trace, counted, iters))
    except StopRun as exc:
        reason = stop_reason_of(exc, "stopped")
    return _finish("rcmaes", seed, M, counted, iters[0], reason, trace,
                   {"fallbacks": stats.fallbacks, "rejections": stats.rejections}), counted


class _TraceProxy:
    """List-like sink that records [evals, best] pairs and counts iterations."""

    def __init__(self, trace, counted, iters):
        self.trace, self.counted, self.iters = trace, counted, iters

    def append(self, _value):
        self.iters[0] += 1
        self.trace.append([self.counted.count, self.counted.best_value])


def run_rtr_record(M, f, x0, limits: RunLimits, seed: int) -> tuple[RunRecord, CountedObjective]:
    counted = limits.counted(f)
    trace: list = []
    iters = [0]
    reason = "converged"
    try:
        run_rtr(M, x0, counted, trace=_TraceProxy(trace, counted, iters))
    except StopRun as exc:
        reason = stop_reason_of(exc, "stopped")
    return _finish("rtr", seed, M, counted, iters[0], reason, trace, {}), counted


def run_rpso_record(M, f, positions, limits: RunLimits, seed: int) -> tuple[RunRecord, CountedObjective]:
    counted = limits.counted(f)
    rng = np.random.default_rng([seed, 4])
    trace: list = []
    reason = "budget"
    swarm = None
    horizon = max(1, (limits.budget - len(positions)) // len(positions))
    try:
        swarm = init_swarm(M, positions, counted, rng, horizon)
        while True:
            pso_step(M, swarm, counted, rng)
            trace.append([counted.count, counted.best_value])
    except StopRun as exc:
        reason = stop_reason_of(exc, "stopped")
    counters = {} if swarm is None else {"log_failures": swarm.log_failures, "clipped": swarm.clipped}
    return _finish("rpso", seed, M, counted, 0 if swarm is None else swarm.k, reason, trace,
                   counters), counted
