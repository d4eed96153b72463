"""Manifold contract and the sampling primitives shared by every optimizer.

Points and tangent vectors are plain numpy arrays in each manifold's chart
convention (``LadderPoint`` is the one exception).  Tangent vectors are kept
in ambient form; an orthonormal frame at ``x`` is an array of shape
``(dim, *tangent_shape)`` and converts between ambient vectors and their
``dim`` coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MEMBERSHIP_TOL = 1e-9
ROUNDTRIP_TOL = 1e-8


class GeometryError(ValueError):
    """Raised when a geometric operation is called outside its domain."""


class OutsideNormalNeighborhood(GeometryError):
    """``y`` is not inside the normal neighborhood of ``x``."""


@dataclass
class SamplingStats:
    """Counters for the truncated-Gaussian sampler.

    ``fallbacks`` counts samples that exhausted the rejection budget and were
    produced by radial rescaling instead.
    """

    draws: int = 0
    rejections: int = 0
    fallbacks: int = 0

    def merge(self, other: "SamplingStats") -> None:
        self.draws += other.draws
        self.rejections += other.rejections
        self.fallbacks += other.fallbacks


class Manifold:
    """Abstract Riemannian manifold with exact exponential/log maps."""

    name: str = "manifold"
    dim: int = 0

    # --- required geometry -------------------------------------------------
    def exp(self, x, v):
        raise NotImplementedError

    def log(self, x, y):
        raise NotImplementedError

    def dist(self, x, y) -> float:
        raise NotImplementedError

    def transp(self, x, y, w):
        """Parallel transport of ``w`` from ``x`` to ``y`` along the minimizing geodesic."""
        raise NotImplementedError

    def inj(self, x) -> float:
        raise NotImplementedError

    def proj(self, x, a):
        """Orthogonal projection of an ambient array onto the tangent space at ``x``."""
        raise NotImplementedError

    def random_point(self, rng):
        raise NotImplementedError

    def check_point(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        raise NotImplementedError

    def tangent_shape(self, x) -> tuple:
        raise NotImplementedError

    # --- defaults ------------------------------------------------------------
    def inner(self, x, u, v) -> float:
        return float(np.sum(np.asarray(u) * np.asarray(v)))

    def norm(self, x, v) -> float:
        return float(np.sqrt(max(self.inner(x, v, v), 0.0)))

    def zero_vector(self, x):
        return np.zeros(self.tangent_shape(x))

    def random_tangent(self, x, rng):
        """Isotropic Gaussian tangent vector at ``x``."""
        return self.proj(x, rng.standard_normal(self.tangent_shape(x)))

    def exp_many(self, x, coords, frame):
        """``exp_x`` applied to each row of ``coords`` (frame coordinates)."""
        return [self.exp(x, from_coords(frame, c)) for c in np.atleast_2d(coords)]

    def check_tangent(self, x, v, tol: float = MEMBERSHIP_TOL) -> bool:
        v = np.asarray(v, dtype=float)
        if v.shape != self.tangent_shape(x):
            return False
        return bool(np.linalg.norm(v - self.proj(x, v)) <= tol * max(1.0, np.linalg.norm(v)))

    def same_point(self, x, y, tol: float = MEMBERSHIP_TOL) -> bool:
        return self.dist(x, y) <= tol

    def dist_many(self, xs, y) -> np.ndarray:
        """Distances from each point of ``xs`` to ``y``."""
        return np.array([self.dist(x, y) for x in xs])

    def frame(self, x, rng=None):
        """Orthonormal frame at ``x`` built by Gram-Schmidt from random tangents."""
        rng = np.random.default_rng(0) if rng is None else rng
        basis = []
        while len(basis) < self.dim:
            v = self.random_tangent(x, rng)
            for e in basis:
                v = v - self.inner(x, e, v) * e
            for e in basis:  # second pass for stability
                v = v - self.inner(x, e, v) * e
            nv = self.norm(x, v)
            if nv > 1e-8:
                basis.append(v / nv)
        return np.stack(basis)

    def transport_frame(self, x, y, frame):
        """Transport every frame vector to ``y`` and re-orthonormalize."""
        moved = np.stack([self.transp(x, y, e) for e in frame])
        return gram_schmidt(self, y, moved)

    def to_list(self, x):
        return np.asarray(x).tolist()

    def from_list(self, data):
        return np.asarray(data, dtype=float)


def gram_schmidt(M: Manifold, x, vectors):
    out = []
    for v in vectors:
        v = M.proj(x, np.array(v, dtype=float))
        for e in out:
            v = v - M.inner(x, e, v) * e
        nv = M.norm(x, v)
        if nv < 1e-12:
            raise GeometryError("degenerate frame during re-orthonormalization")
        out.append(v / nv)
    return np.stack(out)


def to_coords(M: Manifold, x, frame, v) -> np.ndarray:
    """Components of tangent vector ``v`` in the orthonormal ``frame``."""
    return np.array([M.inner(x, e, v) for e in frame])


def from_coords(frame, c):
    """Ambient tangent vector with frame components ``c``."""
    return np.tensordot(np.asarray(c, dtype=float), frame, axes=(0, 0))


def frame_gram(M: Manifold, x, frame) -> np.ndarray:
    k = len(frame)
    return np.array([[M.inner(x, frame[i], frame[j]) for j in range(k)] for i in range(k)])


def sample_ball_coords(cov, sigma: float, radius: float, rng, n: int = 1,
                       stats: SamplingStats | None = None) -> np.ndarray:
    """Draw ``n`` coordinate vectors from N(0, sigma^2 cov) conditioned on the ball.

    Candidates are ``sigma * z @ chol(cov).T`` with ``z`` standard normal of
    shape ``(pending, dim)``.  Every unfilled slot gets one candidate per
    round.  After ``100 * dim`` rounds the remaining slots take the last
    rejected candidate rescaled to norm ``radius * u**(1/dim)``.
    """
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    dim = cov.shape[0]
    L = np.linalg.cholesky(cov)
    out = np.empty((n, dim))
    pending = np.arange(n)
    last = np.zeros((n, dim))
    cap = 100 * dim
    rounds = 0
    while pending.size and rounds < cap:
        z = rng.standard_normal((pending.size, dim))
        cand = sigma * z @ L.T
        ok = np.linalg.norm(cand, axis=1) <= radius
        out[pending[ok]] = cand[ok]
        last[pending[~ok]] = cand[~ok]
        if stats is not None:
            stats.draws += pending.size
            stats.rejections += int((~ok).sum())
        pending = pending[~ok]
        rounds += 1
    if pending.size:
        u = rng.uniform(size=pending.size)
        v = last[pending]
        nv = np.linalg.norm(v, axis=1, keepdims=True)
        nv[nv == 0] = 1.0
        out[pending] = v / nv * (radius * u ** (1.0 / dim))[:, None]
        if stats is not None:
            stats.fallbacks += pending.size
    return out


def sample_truncated_gaussian(M: Manifold, x, frame, cov, sigma: float, radius: float,
                              rng, stats: SamplingStats | None = None):
    """Tangent vector at ``x`` from N(0, sigma^2 cov) restricted to ``B(0, radius)``."""
    if radius > M.inj(x) * (1 + 1e-12):
        raise GeometryError("truncation radius exceeds the injectivity radius")
    c = sample_ball_coords(cov, sigma, radius, rng, 1, stats)[0]
    return from_coords(frame, c)


def sample_geodesic_sphere(M: Manifold, x, r: float, rng):
    """Uniform point on the geodesic sphere of radius ``r`` about ``x``."""
    if not r > 0 or r > M.inj(x) * (1 + 1e-12):
        raise GeometryError(f"sphere radius {r} outside (0, inj(x)]")
    v = M.random_tangent(x, rng)
    nv = M.norm(x, v)
    while nv < 1e-12:
        v = M.random_tangent(x, rng)
        nv = M.norm(x, v)
    return M.exp(x, v * (r / nv))

