"""Extended RSDFO: a population of local cores mixed over geodesic balls.

Each iteration draws centroids from ``(1 - tau) sum phi delta + tau U``
where ``U`` stands for boundary exploration of the explored region, advances
one core step per pick, estimates the expected fitness of every interim
centroid, keeps the fittest ``n_cull`` and resets the mixture coefficients to
the natural-gradient fixed point.

Objectives are passed through a translation ``g = f - T`` so that the
expected fitness has the strict sign the coefficient formulas need.  ``T`` is
chosen from the extremes observed so far so that all ``|g|`` lie within a
factor of two of one another; see :func:`translation_offset`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import CoreSpec, RsdfoState, init_state
from .evaluation import CountedObjective, StopRun, target_predicate
from .geometry import Manifold, SamplingStats, sample_geodesic_sphere
from .mixture import EPS0, expected_fitness, fixed_point_coefficients, mixture_expected_fitness
from .records import RunRecord, stop_reason_of

BOUNDARY_TOL = 1e-9


@dataclass
class Centroid:
    id: int
    point: object
    radius: float
    state: RsdfoState
    origin: str = "initial"          # initial | offspring | boundary
    E: float | None = None           # translated expected fitness
    raw: float | None = None         # Monte Carlo mean of f
    phi: float = 0.0


@dataclass
class ExploredRegion:
    """Append-only list of (point, radius) for every centroid ever created."""

    points: list = field(default_factory=list)
    radii: list = field(default_factory=list)

    def add(self, point, radius: float) -> None:
        self.points.append(point)
        self.radii.append(float(radius))

    def __len__(self) -> int:
        return len(self.points)

    def inside_margin(self, M: Manifold, y) -> float:
        """min over balls of d(center, y) - radius; negative means inside a ball."""
        if not self.points:
            return math.inf
        return float(np.min(M.dist_many(self.points, y) - np.asarray(self.radii)))


@dataclass(frozen=True)
class ExtendedConfig:
    n_random: int = 2
    n_cull: int = 2
    n_init: int = 2
    eps0: float = EPS0
    eps_b: float = 1.0
    tau_a: float = 0.6
    tau_b: float = 0.015
    tau_floor: float = 1e-3
    mc_samples: int = 10
    budget: int | None = 10_000
    core: CoreSpec = CoreSpec("generic", 50, 10)
    sense: str = "min"
    n_pick: int = 5
    n_per: int = 50
    mode: str = "practical"          # practical | theoretical
    mc_seeds: str = "fresh"          # fresh | frozen
    target: float | None = None
    tol: float = 0.0
    target_rule: str = "below"
    max_iter: int = 100_000
    check_monotone: bool = False

    def validate(self) -> None:
        if self.n_random < 1 or self.n_cull < 1 or self.n_init < 1:
            raise ValueError("n_random, n_cull and n_init must be positive")
        if not 0 < self.eps_b <= 1:
            raise ValueError("eps_b must lie in (0, 1]")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be positive")
        if self.sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        if self.mode not in ("practical", "theoretical"):
            raise ValueError("mode must be 'practical' or 'theoretical'")
        if self.mc_seeds not in ("fresh", "frozen"):
            raise ValueError("mc_seeds must be 'fresh' or 'frozen'")
        if not 0 < self.tau_a <= 1 or self.tau_b < 0:
            raise ValueError("need 0 < tau_a <= 1 and tau_b >= 0")


def tau(k: int, a: float = 0.6, b: float = 0.015, floor: float = 1e-3) -> float:
    return max(a * math.exp(-b * k), floor)


def draw_exploration_distribution(phi, tau_k: float, rng) -> int:
    """One raw draw: index into ``phi`` or ``-1`` for an exploration request."""
    p = np.append((1.0 - tau_k) * np.asarray(phi, dtype=float), tau_k)
    p = p / p.sum()
    i = int(rng.choice(p.size, p=p))
    return -1 if i == p.size - 1 else i


def select_centroids(ids, phi, tau_k: float, n_random: int, rng):
    """Draw ``n_random`` non-repeating choices.

    Returns ``(picked ids, number of exploration requests)``.  A picked
    centroid is removed and the remaining masses renormalized; exploration
    stays available on every draw.  Once no centroid mass remains the rest
    of the draws become exploration requests.
    """
    mass = (1.0 - tau_k) * np.asarray(phi, dtype=float)
    alive = np.ones(len(ids), dtype=bool)
    picks, n_explore = [], 0
    for _ in range(n_random):
        m = np.where(alive, mass, 0.0)
        if m.sum() <= 0:
            n_explore += 1
            continue
        p = np.append(m, tau_k)
        i = int(rng.choice(p.size, p=p / p.sum()))
        if i == len(ids):
            n_explore += 1
        else:
            picks.append(ids[i])
            alive[i] = False
    return picks, n_explore


def boundary_sample(M: Manifold, region: ExploredRegion, rng, n_pick: int = 5, n_per: int = 50,
                    want: int | None = None, pick_all: bool = False) -> list:
    """Points on the boundary of the explored region.

    Samples ``n_per`` points on the geodesic sphere of each of ``n_pick``
    randomly chosen explored balls (all balls when ``pick_all``) and keeps a
    candidate only when it lies outside every open ball, including those of
    candidates accepted earlier in the same call.  At most ``want`` points
    are returned.
    """
    if len(region) == 0:
        raise ValueError("explored region is empty")
    if pick_all:
        chosen = np.arange(len(region))
    else:
        chosen = rng.choice(len(region), size=min(n_pick, len(region)), replace=False)
    candidates = []
    for i in chosen:
        for _ in range(n_per):
            candidates.append((sample_geodesic_sphere(M, region.points[i], region.radii[i], rng),
                               region.radii[i]))
    accepted = []
    local = ExploredRegion()
    for y, r in candidates:
        if want is not None and len(accepted) >= want:
            break
        if region.inside_margin(M, y) < -BOUNDARY_TOL:
            continue
        if local.inside_margin(M, y) < -BOUNDARY_TOL:
            continue
        accepted.append(y)
        local.add(y, r)
    return accepted


def cull(centroids: list, n_cull: int, sense: str = "min") -> list:
    """Fittest ``n_cull`` by expected fitness, ties to the lower id."""
    sign = 1.0 if sense == "min" else -1.0
    ranked = sorted(centroids, key=lambda c: (sign * c.E, c.id))
    return ranked[:n_cull]


def recalibrate(E, eps0: float = EPS0, sense: str = "min") -> np.ndarray:
    return fixed_point_coefficients(E, eps0, "min" if sense == "min" else "max")


def translation_offset(lo: float, hi: float, sense: str = "min") -> float:
    """Offset ``T`` for ``g = f - T`` given observed extremes ``lo <= hi``.

    min: ``T = 2 hi - lo + 1`` so ``-g`` lies in ``[a + 1, 2a + 1]`` with
    ``a = hi - lo``.  max mirrors it.  Keeping all magnitudes within a factor
    of two makes ``sum g^2 / sum |g|`` monotone in every magnitude, which is
    what the non-decreasing mixture fitness relies on.
    """
    if sense == "min":
        return 2.0 * hi - lo + 1.0
    return 2.0 * lo - hi - 1.0


@dataclass
class ExtendedState:
    retained: list
    region: ExploredRegion
    k: int = 0
    next_id: int = 0
    boundary_points: list = field(default_factory=list)
    boundary_empty: int = 0
    stats: SamplingStats = field(default_factory=SamplingStats)
    mixture_trace: list = field(default_factory=list)
    monotone_violations: int = 0
    offset: float = 0.0
    exhausted: bool = False


class ExtendedRSDFO:
    """Driver bound to one manifold, objective and configuration."""

    def __init__(self, M: Manifold, f, config: ExtendedConfig, seed: int = 0):
        config.validate()
        self.M, self.cfg, self.seed = M, config, int(seed)
        self.counted = CountedObjective(
            f, config.budget, target_predicate(config.target, config.tol, config.target_rule))
        self.f = self.counted
        self.rng = np.random.default_rng([self.seed, 0])
        self._frozen: dict[int, float] = {}

    # --- centroid bookkeeping ------------------------------------------------
    def _new_centroid(self, st: ExtendedState, point, state: RsdfoState | None, origin: str) -> Centroid:
        M = self.M
        c = Centroid(id=st.next_id, point=point, radius=self.cfg.eps_b * M.inj(point),
                     state=state if state is not None else init_state(M, point), origin=origin)
        st.next_id += 1
        st.region.add(point, c.radius)
        return c

    def _mc_rng(self, k: int, cid: int):
        if self.cfg.mc_seeds == "frozen":
            return np.random.default_rng([self.seed, 1, cid])
        return np.random.default_rng([self.seed, 2, k, cid])

    def _estimate(self, st: ExtendedState, c: Centroid, k: int) -> float:
        if self.cfg.mc_seeds == "frozen" and c.id in self._frozen:
            return self._frozen[c.id]
        s = c.state
        v = expected_fitness(self.f, self.M, s.mean, s.frame, s.C, s.sigma, self.M.inj(s.mean),
                             self.cfg.mc_samples, self._mc_rng(k, c.id), st.stats)
        if self.cfg.mc_seeds == "frozen":
            self._frozen[c.id] = v
        return v

    def _assign(self, st: ExtendedState, cs: list) -> None:
        T = translation_offset(self.counted.lo, self.counted.hi, self.cfg.sense)
        st.offset = T
        for c in cs:
            c.E = c.raw - T

    # --- algorithm -----------------------------------------------------------
    def initialize(self, points=None) -> ExtendedState:
        st = ExtendedState(retained=[], region=ExploredRegion())
        if points is None:
            from .benchmarks import random_initial
            points = [random_initial(self.M, self.rng) for _ in range(self.cfg.n_init)]
        cs = [self._new_centroid(st, p, None, "initial") for p in points]
        for c in cs:
            c.raw = self._estimate(st, c, 0)
        self._assign(st, cs)
        kept = cull(cs, self.cfg.n_cull, self.cfg.sense)
        phi = recalibrate([c.E for c in kept], self.cfg.eps0, self.cfg.sense)
        for c, p in zip(kept, phi):
            c.phi = float(p)
        st.retained = kept
        st.mixture_trace.append(mixture_expected_fitness(phi, [c.E for c in kept]))
        return st

    def step(self, st: ExtendedState) -> ExtendedState:
        cfg, M, rng = self.cfg, self.M, self.rng
        k = st.k
        ids = [c.id for c in st.retained]
        picks, n_explore = select_centroids(ids, [c.phi for c in st.retained],
                                            tau(k, cfg.tau_a, cfg.tau_b, cfg.tau_floor),
                                            cfg.n_random, rng)
        if cfg.mode == "theoretical" and n_explore == 0:
            picks, n_explore = picks[:-1], 1
        by_id = {c.id: c for c in st.retained}
        parents = [by_id[i] for i in picks]
        if n_explore:
            pts = boundary_sample(M, st.region, rng, cfg.n_pick, cfg.n_per, want=n_explore,
                                  pick_all=cfg.mode == "theoretical")
            if not pts and cfg.mode == "theoretical":
                # confirm saturation with a denser pass before giving up
                pts = boundary_sample(M, st.region, rng, cfg.n_pick, 10 * cfg.n_per,
                                      want=n_explore, pick_all=True)
            if not pts:
                st.boundary_empty += 1
                if cfg.mode == "theoretical":
                    st.exhausted = True
                    return st
            for p in pts:
                b = self._new_centroid(st, p, None, "boundary")
                st.boundary_points.append(p)
                parents.append(b)

        offspring = []
        params = cfg.core.params(M.dim) if cfg.core.kind == "rcmaes" else None
        for par in parents:
            if par.state.terminated:
                continue
            new_state = cfg.core.step(M, par.state, self.f, rng, stats=st.stats, params=params)
            offspring.append(self._new_centroid(st, new_state.mean, new_state, "offspring"))

        interim = list(st.retained) + offspring
        for c in interim:
            if cfg.mc_seeds == "fresh" or c.raw is None:
                c.raw = self._estimate(st, c, k + 1)
        self._assign(st, interim)

        if cfg.check_monotone:
            old = [c.E for c in st.retained]
            before = mixture_expected_fitness(recalibrate(old, cfg.eps0, cfg.sense), old)

        kept = cull(interim, cfg.n_cull, cfg.sense)
        phi = recalibrate([c.E for c in kept], cfg.eps0, cfg.sense)
        for c in interim:
            c.phi = 0.0
        for c, p in zip(kept, phi):
            c.phi = float(p)
        after = mixture_expected_fitness(phi, [c.E for c in kept])
        if cfg.check_monotone:
            worse = after > before if cfg.sense == "min" else after < before
            if worse and abs(after - before) > 1e-12 * max(1.0, abs(before)):
                st.monotone_violations += 1
            st.mixture_trace.append((before, after))
        st.retained = kept
        st.k += 1
        return st

    def converged(self, st: ExtendedState) -> bool:
        if st.exhausted:
            return True
        if self.cfg.mode == "theoretical":
            return False
        return all(c.state.terminated for c in st.retained)

    def run(self, x0=None, record_trace: bool = True) -> tuple[RunRecord, ExtendedState]:
        st = None
        trace = []
        reason = "max_iter"
        try:
            st = self.initialize(x0)
            while st.k < self.cfg.max_iter:
                if self.converged(st):
                    reason = "exhausted" if st.exhausted else "converged"
                    break
                self.step(st)
                if record_trace:
                    trace.append([self.counted.count, self.counted.best_value])
            else:
                reason = "max_iter"
        except StopRun as exc:
            reason = stop_reason_of(exc, "stopped")
        if record_trace:
            trace.append([self.counted.count, self.counted.best_value])
        return self._record(st, trace, reason), st

    def _record(self, st, trace, reason) -> RunRecord:
        M = self.M
        bp = self.counted.best_point
        counters = {}
        extra = {"translation_rule": "T = 2*max_seen - min_seen + 1 (min); mirrored for max"}
        if st is not None:
            counters = {"fallbacks": st.stats.fallbacks, "rejections": st.stats.rejections,
                        "boundary_empty": st.boundary_empty,
                        "centroids_created": st.next_id,
                        "monotone_violations": st.monotone_violations,
                        "covariance_repairs": sum(c.state.repairs for c in st.retained)}
            extra["final_offset"] = st.offset
        return RunRecord(algorithm="ext-rsdfo", seed=self.seed, best_value=self.counted.best_value,
                         best_point=None if bp is None else M.to_list(bp), evals=self.counted.count,
                         iterations=0 if st is None else st.k, stop_reason=reason, trace=trace,
                         counters=counters, extra=extra)
