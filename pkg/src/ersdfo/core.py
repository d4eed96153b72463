"""Local stochastic derivative-free cores on a manifold.

Both cores sample tangent vectors in frame coordinates at the current mean,
rank ``f(exp_mean(v))``, move the mean along a geodesic and carry all
statistics to the new tangent space by parallel transport.  Because the frame
itself is transported, the coordinate arrays (covariance, paths) are left
numerically unchanged by a transport.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Manifold, SamplingStats, from_coords, sample_ball_coords

STAGNATION_TOL = 1e-14
EIG_FLOOR = 1e-12
STEP_CLIP = 0.95


@dataclass(frozen=True)
class RsdfoState:
    mean: object
    frame: np.ndarray
    C: np.ndarray
    sigma: float = 1.0
    p_sigma: np.ndarray | None = None
    p_c: np.ndarray | None = None
    k: int = 0
    terminated: bool = False
    last_best: float = math.inf
    repairs: int = 0
    clipped: int = 0

    @property
    def dim(self) -> int:
        return self.C.shape[0]


def init_state(M: Manifold, x, sigma: float = 1.0, rng=None) -> RsdfoState:
    """Fresh state at ``x``: identity covariance and zero evolution paths."""
    d = M.dim
    return RsdfoState(mean=x, frame=M.frame(x, rng), C=np.eye(d), sigma=float(sigma),
                      p_sigma=np.zeros(d), p_c=np.zeros(d))


@dataclass(frozen=True)
class CmaParams:
    """Strategy constants for a dimension ``N`` and ``m1`` samples per step."""

    N: int
    m1: int
    m2: int
    weights: np.ndarray = field(repr=False)
    m_eff: float
    c_c: float
    c_sigma: float
    mu_cov: float
    c_cov: float
    d_sigma: float
    chi_n: float

    @classmethod
    def default(cls, N: int, m1: int, m2: int | None = None) -> "CmaParams":
        m2 = max(1, m1 // 4) if m2 is None else m2
        w = log_weights(m2)
        m_eff = 1.0 / float(np.sum(w ** 2))
        c_c = 4.0 / (N + 4.0)
        c_sigma = (m_eff + 2.0) / (N + m_eff + 3.0)
        mu_cov = m_eff
        c_cov = (2.0 / (mu_cov * (N + math.sqrt(2.0)) ** 2)
                 + (1.0 - 1.0 / mu_cov) * min(1.0, (2.0 * mu_cov - 1.0) / ((N + 2.0) ** 2 + mu_cov)))
        d_sigma = 1.0 + 2.0 * max(0.0, math.sqrt((m_eff - 1.0) / (N + 1.0))) + c_sigma
        chi_n = math.sqrt(N) * (1.0 - 1.0 / (4.0 * N) + 1.0 / (21.0 * N * N))
        return cls(N, m1, m2, w, m_eff, c_c, c_sigma, mu_cov, c_cov, d_sigma, chi_n)


def log_weights(m2: int) -> np.ndarray:
    """Recombination weights proportional to log((m2 + 1) / i), summing to one."""
    i = np.arange(1, m2 + 1)
    w = np.log((m2 + 1.0) / i)
    return w / w.sum()


def repair_covariance(C: np.ndarray, floor: float = EIG_FLOOR):
    """Symmetrize and lift eigenvalues below ``floor``; returns (C, repaired)."""
    C = 0.5 * (C + C.T)
    vals, vecs = np.linalg.eigh(C)
    if vals.min() >= floor:
        return C, False
    vals = np.maximum(vals, floor)
    return (vecs * vals) @ vecs.T, True


def clip_step(step: np.ndarray, inj: float):
    n = float(np.linalg.norm(step))
    limit = STEP_CLIP * inj
    if n > limit:
        return step * (limit / n), True
    return step, False


def transport_state(M: Manifold, state: RsdfoState, new_mean) -> RsdfoState:
    """Carry frame (and with it C and the paths) to ``new_mean``."""
    frame = M.transport_frame(state.mean, new_mean, state.frame)
    return replace(state, mean=new_mean, frame=frame)


def _sample_and_rank(M, state, f, m1, rng, radius, stats):
    radius = M.inj(state.mean) if radius is None else radius
    coords = sample_ball_coords(state.C, state.sigma, radius, rng, m1, stats)
    values = np.array([f(y) for y in M.exp_many(state.mean, coords, state.frame)])
    order = np.argsort(values, kind="stable")
    return coords[order], values[order]


def _stagnated(state: RsdfoState, best: float) -> bool:
    return abs(best - state.last_best) < STAGNATION_TOL


def _move(M, state, step):
    step, was_clipped = clip_step(step, M.inj(state.mean))
    new_mean = M.exp(state.mean, from_coords(state.frame, step))
    return step, transport_state(M, state, new_mean), was_clipped


def rsdfo_step(M: Manifold, state: RsdfoState, f, m1: int, m2: int, rng,
               radius: float | None = None, stats: SamplingStats | None = None,
               step_scale: float = 1.0) -> RsdfoState:
    """One generic sample/select/re-estimate step (minimization).

    The new mean is ``exp(step_scale * sum w_i v_i)`` over the best ``m2``
    samples; the new covariance is their weighted scatter about that mean
    step, in units of ``sigma``.
    """
    coords, values = _sample_and_rank(M, state, f, m1, rng, radius, stats)
    w = log_weights(m2)
    best = coords[:m2]
    mstep = w @ best
    centered = best - mstep
    C = (centered.T * w) @ centered / state.sigma ** 2
    C, repaired = repair_covariance(C)
    _, moved, was_clipped = _move(M, state, step_scale * mstep)
    done = _stagnated(state, values[0]) or state.sigma * math.sqrt(np.linalg.eigvalsh(C)[-1]) < 1e-12
    return replace(moved, C=C, k=state.k + 1, terminated=done, last_best=float(values[0]),
                   repairs=state.repairs + repaired, clipped=state.clipped + was_clipped)


def rcmaes_step(M: Manifold, state: RsdfoState, f, params: CmaParams, rng,
                radius: float | None = None, stats: SamplingStats | None = None) -> RsdfoState:
    """One CMA step in the tangent space at the mean, then transport."""
    P = params
    coords, values = _sample_and_rank(M, state, f, P.m1, rng, radius, stats)
    best = coords[:P.m2]
    sigma = state.sigma
    step, moved, was_clipped = _move(M, state, P.weights @ best)
    y = step / sigma

    vals, vecs = np.linalg.eigh(state.C)
    inv_sqrt = (vecs / np.sqrt(np.maximum(vals, EIG_FLOOR))) @ vecs.T
    p_sigma = ((1 - P.c_sigma) * state.p_sigma
               + math.sqrt(P.c_sigma * (2 - P.c_sigma) * P.m_eff) * (inv_sqrt @ y))
    p_c = (1 - P.c_c) * state.p_c + math.sqrt(P.c_c * (2 - P.c_c) * P.m_eff) * y

    rank_mu = (best.T * P.weights) @ best / sigma ** 2
    C = ((1 - P.c_cov) * state.C + (P.c_cov / P.mu_cov) * np.outer(p_c, p_c)
         + P.c_cov * (1 - 1 / P.mu_cov) * rank_mu)
    C, repaired = repair_covariance(C)
    new_sigma = sigma * math.exp((P.c_sigma / P.d_sigma) * (np.linalg.norm(p_sigma) / P.chi_n - 1))

    done = (_stagnated(state, values[0])
            or new_sigma * math.sqrt(np.linalg.eigvalsh(C)[-1]) < 1e-12
            or not math.isfinite(new_sigma))
    return replace(moved, C=C, sigma=new_sigma, p_sigma=p_sigma, p_c=p_c, k=state.k + 1,
                   terminated=done, last_best=float(values[0]),
                   repairs=state.repairs + repaired, clipped=state.clipped + was_clipped)


@dataclass(frozen=True)
class CoreSpec:
    """Which core to run and its sample sizes."""

    kind: str = "generic"   # "generic" | "rcmaes"
    m1: int = 50
    m2: int = 10

    def params(self, N: int) -> CmaParams:
        return CmaParams.default(N, self.m1, self.m2)

    def step(self, M, state, f, rng, radius=None, stats=None, params=None):
        if self.kind == "generic":
            return rsdfo_step(M, state, f, self.m1, self.m2, rng, radius, stats)
        if self.kind == "rcmaes":
            return rcmaes_step(M, state, f, params or self.params(M.dim), rng, radius, stats)
        raise ValueError(f"unknown core {self.kind!r}")


def run_core(M: Manifold, x0, f, core: CoreSpec, rng, stats: SamplingStats | None = None,
             max_iter: int = 10**9, trace: list | None = None) -> RsdfoState:
    """Iterate a single core from ``x0`` until it terminates.

    ``f`` is usually a :class:`~ersdfo.evaluation.CountedObjective`; its
    budget and target exceptions propagate to the caller.
    """
    state = init_state(M, x0)
    params = core.params(M.dim) if core.kind == "rcmaes" else None
    while not state.terminated and state.k < max_iter:
        state = core.step(M, state, f, rng, stats=stats, params=params)
        if trace is not None:
            trace.append(getattr(f, "best_value", state.last_best))
    return state
