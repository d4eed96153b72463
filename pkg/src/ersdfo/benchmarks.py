"""Benchmark objectives (all minimization) and random initial points."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import Manifold
from .manifolds import Grassmann, JacobsLadder, LadderPoint, Sphere

LADDER_OPTIMAL_TORI = (0, 15, -25)
GRASSMANN_BASIN_VALUE = -2.87
LADDER_CLASSES = ("l+l", "l+g", "g+l", "g+g")


# --- sphere -----------------------------------------------------------------

def sphere_angles(x) -> tuple[float, float]:
    """(theta, phi): elevation above the xy-plane and azimuth in (-pi, pi]."""
    x = np.asarray(x, dtype=float)
    theta = math.asin(max(-1.0, min(1.0, x[2])))
    phi = math.atan2(x[1], x[0])
    return theta, phi


def sphere_point(theta: float, phi: float) -> np.ndarray:
    return np.array([math.cos(theta) * math.cos(phi), math.cos(theta) * math.sin(phi),
                     math.sin(theta)])


def sphere_objective(theta: float, phi: float) -> float:
    return (-2.0 * math.cos(6.0 * theta) + 2.0 * math.cos(12.0 * phi)
            + (math.pi / 12.0 - phi) ** 2 + 3.5 * theta ** 2 + 4.0)


def sphere_f(x) -> float:
    return sphere_objective(*sphere_angles(x))


# --- Grassmannian -----------------------------------------------------------

def gramacy_lee(d: float) -> float:
    """sin(10 pi d) / (2 d) + (d - 1)^4, continuous at d = 0."""
    if d < 1e-12:
        return 5.0 * math.pi + 1.0
    return math.sin(10.0 * math.pi * d) / (2.0 * d) + (d - 1.0) ** 4


def grassmann_reference(p: int, n: int) -> np.ndarray:
    return np.eye(n, p)


def grassmann_objective(x, p: int, n: int) -> float:
    return gramacy_lee(Grassmann(p, n).dist(x, grassmann_reference(p, n)))


# --- Jacob's ladder ---------------------------------------------------------

def jacobs_fG(n: int) -> float:
    """Torus-index factor, transcribed branch by branch."""
    n = int(n)
    scale = abs(n / 20.0) ** 0.1
    if n in LADDER_OPTIMAL_TORI:
        return 0.05
    if n > 7.5:
        return (-(math.sin(0.8 * n - 15.0) / (0.8 * (n - 15.0))) ** 2 + 1.05) * scale
    if n < -7.5:
        return (-(math.sin(0.8 * n + 25.0) / (0.8 * (n + 25.0))) ** 2 + 1.05) * scale
    return -(math.sin(0.8 * n) / (0.8 * n)) ** 2 * scale


def jacobs_fG_repaired(n: int) -> float:
    """Diagnostic variant: every branch is ``1.05 - sinc^2`` centred on its optimal torus.

    Non-negative, with its minimum 0.05 only on the optimal tori.
    """
    n = int(n)
    if n in LADDER_OPTIMAL_TORI:
        return 0.05
    centre = 15 if n > 7.5 else (-25 if n < -7.5 else 0)
    u = 0.8 * (n - centre)
    return (1.05 - (math.sin(u) / u) ** 2) * abs(n / 20.0) ** 0.1


def jacobs_fL(theta: float, phi: float) -> float:
    """Levy N.13 in radians, shifted up by 35."""
    return (math.sin(3 * math.pi * theta) ** 2
            + (theta - 1) ** 2 * (1 + math.sin(3 * math.pi * phi) ** 2)
            + (phi - 1) ** 2 * (1 + math.sin(2 * math.pi * phi) ** 2) + 35.0)


def jacobs_objective(x: LadderPoint) -> float:
    return jacobs_fG(x.n) * jacobs_fL(x.theta, x.phi)


def jacobs_objective_repaired(x: LadderPoint) -> float:
    return jacobs_fG_repaired(x.n) * jacobs_fL(x.theta, x.phi)


# --- registry -----------------------------------------------------------------

@dataclass
class Objective:
    """A benchmark problem: manifold, function, known optimum and success rule.

    ``target_rule`` is ``"below"`` (success when ``f <= target + tol``) or
    ``"near"`` (success when ``|f - target| <= tol``).
    """

    name: str
    manifold: Manifold
    f: Callable
    target: float
    tol: float
    target_rule: str = "below"
    optimum_points: list = field(default_factory=list)
    classes: tuple = ("local", "global")

    def reached(self, value: float) -> bool:
        if self.target_rule == "near":
            return abs(value - self.target) <= self.tol
        return value <= self.target + self.tol

    def classify(self, point, value: float) -> str:
        return "global" if self.reached(value) else "local"

    def random_initial(self, rng):
        return random_initial(self.manifold, rng)


@dataclass
class LadderObjective(Objective):
    classes: tuple = LADDER_CLASSES

    def classify(self, point, value: float) -> str:
        return classify_ladder(point)


def classify_ladder(x: LadderPoint, angle_tol: float = 1e-3) -> str:
    """Torus part first, angle part second; each is ``g`` or ``l``.

    The angle part is ``g`` when Levy N.13 is within ``angle_tol`` of its
    minimum 35.
    """
    torus = "g" if x.n in LADDER_OPTIMAL_TORI else "l"
    angle = "g" if jacobs_fL(x.theta, x.phi) - 35.0 < angle_tol else "l"
    return f"{torus}+{angle}"


def random_initial(M: Manifold, rng, bounds: tuple[int, int] = (-30, 30)):
    if isinstance(M, JacobsLadder):
        return M.random_point(rng, *bounds)
    return M.random_point(rng)


def make_objective(name: str, R: float = 2.0, r: float = 0.5) -> Objective:
    if name == "sphere":
        return Objective("sphere", Sphere(2), sphere_f, 0.0, 1e-6,
                         optimum_points=[sphere_point(0.0, math.pi / 12)])
    if name.startswith("grassmann"):
        p, n = (int(t) for t in name.split("-")[1:3])
        M = Grassmann(p, n)
        return Objective(name, M, lambda x: grassmann_objective(x, p, n),
                         GRASSMANN_BASIN_VALUE, 1e-8)
    if name in ("ladder", "ladder-repaired"):
        f = jacobs_objective if name == "ladder" else jacobs_objective_repaired
        return LadderObjective(name, JacobsLadder(R, r), f, 1.75, 1e-8,
                               target_rule="near",
                               optimum_points=[LadderPoint(k, 1.0, 1.0) for k in LADDER_OPTIMAL_TORI])
    raise KeyError(f"unknown objective {name!r}")
