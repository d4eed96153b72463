"""Concrete manifolds: unit spheres, real Grassmannians and Jacob's ladder."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    MEMBERSHIP_TOL,
    GeometryError,
    Manifold,
    OutsideNormalNeighborhood,
)

TWO_PI = 2.0 * math.pi


def _null_basis(x: np.ndarray) -> np.ndarray:
    """Columns spanning the orthogonal complement of the columns of ``x``."""
    x = x.reshape(x.shape[0], -1)
    q, _ = np.linalg.qr(np.hstack([x, np.eye(x.shape[0])]))
    return q[:, x.shape[1]:x.shape[0]]


class Sphere(Manifold):
    """Unit sphere S^n embedded in R^(n+1)."""

    def __init__(self, n: int = 2):
        if n < 1:
            raise ValueError("sphere dimension must be >= 1")
        self.n = n
        self.dim = n
        self.name = f"S{n}"

    def tangent_shape(self, x):
        return (self.n + 1,)

    def inj(self, x) -> float:
        return math.pi

    def check_point(self, x, tol=MEMBERSHIP_TOL):
        x = np.asarray(x, dtype=float)
        return x.shape == (self.n + 1,) and abs(np.linalg.norm(x) - 1.0) <= tol

    def proj(self, x, a):
        a = np.asarray(a, dtype=float)
        return a - np.dot(x, a) * x

    def exp(self, x, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n + 1,):
            raise GeometryError("tangent vector has the wrong dimension")
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return np.array(x, dtype=float)
        y = math.cos(nv) * x + math.sin(nv) * (v / nv)
        return y / np.linalg.norm(y)

    def exp_many(self, x, coords, frame):
        V = np.atleast_2d(coords) @ frame
        nv = np.linalg.norm(V, axis=1, keepdims=True)
        safe = np.where(nv == 0.0, 1.0, nv)
        Y = np.cos(nv) * x + np.sin(nv) * (V / safe)
        return list(Y / np.linalg.norm(Y, axis=1, keepdims=True))

    def dist(self, x, y) -> float:
        c = float(np.dot(x, y))
        s = float(np.linalg.norm(np.asarray(y) - c * np.asarray(x)))
        return math.atan2(s, c)

    def dist_many(self, xs, y):
        X = np.asarray(xs, dtype=float).reshape(-1, self.n + 1)
        c = X @ y
        s = np.linalg.norm(y - c[:, None] * X, axis=1)
        return np.arctan2(s, c)

    def log(self, x, y):
        c = float(np.dot(x, y))
        u = np.asarray(y, dtype=float) - c * np.asarray(x)
        s = float(np.linalg.norm(u))
        d = math.atan2(s, c)
        if d >= math.pi - 1e-12 or (s < 1e-15 and c < 0):
            raise OutsideNormalNeighborhood("antipodal points have no unique geodesic")
        if s == 0.0:
            return np.zeros(self.n + 1)
        return (d / s) * u

    def transp(self, x, y, w):
        v = self.log(x, y)
        d = np.linalg.norm(v)
        w = np.asarray(w, dtype=float)
        if d == 0.0:
            return w.copy()
        u = v / d
        a = float(np.dot(u, w))
        out = w + a * ((math.cos(d) - 1.0) * u - math.sin(d) * np.asarray(x))
        return self.proj(y, out)

    def random_point(self, rng):
        z = rng.standard_normal(self.n + 1)
        return z / np.linalg.norm(z)

    def frame(self, x, rng=None):
        if rng is not None:
            return super().frame(x, rng)
        return _null_basis(np.asarray(x, dtype=float)).T.copy()


class Grassmann(Manifold):
    """Gr(p, n): p-planes in R^n, represented by n x p orthonormal matrices.

    Tangent vectors are horizontal lifts (X^T V = 0).
    """

    def __init__(self, p: int, n: int):
        if not 1 <= p < n:
            raise ValueError("need 1 <= p < n")
        self.p, self.n = p, n
        self.dim = p * (n - p)
        self.name = f"Gr({p},{n})"

    def tangent_shape(self, x):
        return (self.n, self.p)

    def inj(self, x) -> float:
        return math.pi / 2

    def check_point(self, x, tol=MEMBERSHIP_TOL):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n, self.p):
            return False
        return np.abs(x.T @ x - np.eye(self.p)).max() <= tol

    def proj(self, x, a):
        a = np.asarray(a, dtype=float)
        return a - x @ (x.T @ a)

    @staticmethod
    def _orthonormalize(y):
        q, r = np.linalg.qr(y)
        s = np.sign(np.diag(r))
        s[s == 0] = 1.0
        return q * s

    def _geodesic(self, x, v):
        u, s, wt = np.linalg.svd(v, full_matrices=False)
        return (x @ wt.T) * np.cos(s) @ wt + u * np.sin(s) @ wt

    def exp(self, x, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n, self.p):
            raise GeometryError("tangent vector has the wrong shape")
        if not np.any(v):
            return np.array(x, dtype=float)
        return self._orthonormalize(self._geodesic(x, v))

    def principal_angles(self, x, y) -> np.ndarray:
        """Principal angles in ascending order.

        Cosines come from X^T Y and sines from the residual Y - X X^T Y;
        atan2 of the pair stays accurate at both ends of [0, pi/2].
        """
        m = x.T @ y
        c = np.linalg.svd(m, compute_uv=False)
        s = np.linalg.svd(y - x @ m, compute_uv=False)[::-1]
        return np.arctan2(s, np.clip(c, 0.0, None))

    def dist(self, x, y) -> float:
        return float(np.linalg.norm(self.principal_angles(x, y)))

    def log(self, x, y):
        m = x.T @ y
        if self.principal_angles(x, y).max() >= math.pi / 2 - 1e-12:
            raise OutsideNormalNeighborhood("a principal angle reaches pi/2")
        a = np.linalg.solve(m.T, (y - x @ m).T).T
        u, s, wt = np.linalg.svd(a, full_matrices=False)
        return self.proj(x, u * np.arctan(s) @ wt)

    def transp(self, x, y, w):
        w = np.asarray(w, dtype=float)
        v = self.log(x, y)
        if not np.any(v):
            return self.proj(y, w @ (x.T @ y))
        u, s, wt = np.linalg.svd(v, full_matrices=False)
        moved = (-(x @ wt.T) * np.sin(s) @ u.T + u * np.cos(s) @ u.T) @ w + w - u @ (u.T @ w)
        # ``moved`` is the lift at the geodesic endpoint representative; re-express at ``y``
        yhat = self._geodesic(x, v)
        return self.proj(y, moved @ (yhat.T @ y))

    def random_point(self, rng):
        return self._orthonormalize(rng.standard_normal((self.n, self.p)))

    def frame(self, x, rng=None):
        if rng is not None:
            return super().frame(x, rng)
        perp = _null_basis(np.asarray(x, dtype=float))
        basis = []
        for i in range(self.n - self.p):
            for j in range(self.p):
                e = np.zeros((self.n, self.p))
                e[:, j] = perp[:, i]
                basis.append(e)
        return np.stack(basis)

    def same_point(self, x, y, tol=MEMBERSHIP_TOL):
        return self.dist(x, y) <= tol


@dataclass(frozen=True)
class LadderPoint:
    """Point on Jacob's ladder: torus index plus minor/major angles in [0, 2pi)."""

    n: int
    theta: float
    phi: float


def torus_index(x: LadderPoint) -> int:
    return x.n


def _wrap_angle(a: float) -> float:
    a = math.fmod(a, TWO_PI)
    if a < 0:
        a += TWO_PI
    return 0.0 if a >= TWO_PI else a


def _wrap_pi(a: float) -> float:
    """Representative of ``a`` in [-pi, pi)."""
    return _wrap_angle(a + math.pi) - math.pi


class JacobsLadder(Manifold):
    """Chain-of-cylinders model of Jacob's ladder.

    Each torus carries the flat metric r^2 dtheta^2 + R^2 dphi^2.  A full turn
    of the major angle moves to the neighbouring torus instead of wrapping, so
    the universal picture is a flat cylinder S^1(r) x R cut into segments of
    length 2 pi R.  Tangent vectors are ``[v_theta, v_phi]`` in length units.
    """

    dim = 2

    def __init__(self, R: float = 2.0, r: float = 0.5):
        if not R > r > 0:
            raise ValueError("need R > r > 0")
        self.R, self.r = float(R), float(r)
        self.name = "JacobsLadder"

    def tangent_shape(self, x):
        return (2,)

    def inj(self, x) -> float:
        return math.pi * self.r

    def check_point(self, x, tol=MEMBERSHIP_TOL):
        return (isinstance(x, LadderPoint) and isinstance(x.n, (int, np.integer))
                and 0.0 <= x.theta < TWO_PI and 0.0 <= x.phi < TWO_PI)

    def proj(self, x, a):
        return np.asarray(a, dtype=float).copy()

    def exp(self, x: LadderPoint, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (2,):
            raise GeometryError("ladder tangent vectors have two components")
        theta = _wrap_angle(x.theta + v[0] / self.r)
        total = x.phi + v[1] / self.R
        k = math.floor(total / TWO_PI)
        phi = total - k * TWO_PI
        if phi >= TWO_PI:
            phi -= TWO_PI
            k += 1
        elif phi < 0:
            phi = 0.0
        return LadderPoint(int(x.n + k), theta, phi)

    def exp_many(self, x, coords, frame):
        V = np.atleast_2d(coords) @ frame
        return [self.exp(x, v) for v in V]

    def _chart_delta(self, x: LadderPoint, y: LadderPoint) -> np.ndarray:
        dtheta = _wrap_pi(y.theta - x.theta)
        dchain = TWO_PI * (y.n - x.n) + (y.phi - x.phi)
        return np.array([self.r * dtheta, self.R * dchain])

    def dist(self, x, y) -> float:
        return float(np.hypot(*self._chart_delta(x, y)))

    def dist_many(self, xs, y):
        n = np.array([p.n for p in xs], dtype=float)
        th = np.array([p.theta for p in xs])
        ph = np.array([p.phi for p in xs])
        dth = np.mod(y.theta - th + math.pi, TWO_PI) - math.pi
        dch = TWO_PI * (y.n - n) + (y.phi - ph)
        return np.hypot(self.r * dth, self.R * dch)

    def log(self, x, y):
        d = self._chart_delta(x, y)
        if np.hypot(*d) >= self.inj(x):
            raise OutsideNormalNeighborhood("target lies outside the pi*r ball")
        return d

    def transp(self, x, y, w):
        # flat metric: transport is the identity in the canonical frame
        return np.asarray(w, dtype=float).copy()

    def random_point(self, rng, lo: int = -30, hi: int = 30):
        return LadderPoint(int(rng.integers(lo, hi + 1)),
                           float(rng.uniform(0, TWO_PI)), float(rng.uniform(0, TWO_PI)))

    def frame(self, x, rng=None):
        return np.eye(2)

    def transport_frame(self, x, y, frame):
        return np.array(frame, dtype=float)

    def same_point(self, x, y, tol=MEMBERSHIP_TOL):
        return x.n == y.n and self.dist(x, y) <= tol

    def to_list(self, x):
        return [int(x.n), float(x.theta), float(x.phi)]

    def from_list(self, data):
        return LadderPoint(int(data[0]), float(data[1]), float(data[2]))


def heuristic_log(M: JacobsLadder, x: LadderPoint, y: LadderPoint) -> np.ndarray:
    """Direction-only stand-in for the ladder log used by particle swarms.

    Same torus: the flat chart difference (no domain check).  Adjacent torus:
    a unit vector along the major direction pointing toward ``y``.  Further
    away: the zero vector.
    """
    dn = y.n - x.n
    if dn == 0:
        return np.array([M.r * _wrap_pi(y.theta - x.theta), M.R * (y.phi - x.phi)])
    if abs(dn) == 1:
        return np.array([0.0, float(np.sign(dn))])
    return np.zeros(2)
