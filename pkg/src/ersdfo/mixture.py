"""Geometry of the mixture-coefficient simplex and expected-fitness estimators.

Coefficient vectors are 1-D arrays ``phi`` summing to one.  The simplex
carries the regularized metric ``diag(phi + eps0)``, whose Hessian potential
is ``kappa(phi) = sum((phi + eps0)**3) / 6``.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .geometry import Manifold, SamplingStats, sample_ball_coords

EPS0 = 1e-8


class SignError(ValueError):
    """Expected-fitness values violate the strict sign required by the sense."""


def _as_vec(a) -> np.ndarray:
    return np.asarray(a, dtype=float).ravel()


def expected_fitness(f: Callable, M: Manifold, x, frame, cov, sigma: float, radius: float,
                     n_mc: int, rng, stats: SamplingStats | None = None) -> float:
    """Monte Carlo mean of ``f`` over ``exp_x`` of truncated-Gaussian tangent draws."""
    if n_mc < 1:
        raise ValueError("need at least one Monte Carlo sample")
    coords = sample_ball_coords(cov, sigma, radius, rng, n_mc, stats)
    return float(np.mean([f(y) for y in M.exp_many(x, coords, frame)]))


def mixture_expected_fitness(phi, E) -> float:
    phi, E = _as_vec(phi), _as_vec(E)
    if phi.shape != E.shape:
        raise ValueError("coefficient and fitness vectors are not aligned")
    return float(phi @ E)


def modified_metric_inverse(phi, eps0: float = EPS0) -> np.ndarray:
    if eps0 <= 0:
        raise ValueError("eps0 must be positive")
    return np.diag(1.0 / (_as_vec(phi) + eps0))


def modified_metric(phi, u, v, eps0: float = EPS0) -> float:
    """Inner product of two coefficient-space directions at ``phi``."""
    return float(np.sum(_as_vec(u) * _as_vec(v) * (_as_vec(phi) + eps0)))


def kappa(phi, eps0: float = EPS0) -> float:
    return float(np.sum((_as_vec(phi) + eps0) ** 3) / 6.0)


def bregman_divergence(xi, xi_prime, eps0: float = EPS0) -> float:
    xi, xi_prime = _as_vec(xi), _as_vec(xi_prime)
    if xi.shape != xi_prime.shape:
        raise ValueError("dimension mismatch")
    grad = 0.5 * (xi_prime + eps0) ** 2
    return kappa(xi, eps0) - kappa(xi_prime, eps0) - float(grad @ (xi - xi_prime))


def natural_gradient(phi, E, eps0: float = EPS0) -> np.ndarray:
    phi, E = _as_vec(phi), _as_vec(E)
    if phi.shape != E.shape:
        raise ValueError("coefficient and fitness vectors are not aligned")
    return E / (phi + eps0)


def project_to_simplex(xi) -> np.ndarray:
    """Orthogonal projection along the all-ones normal, then clip and renormalize."""
    xi = _as_vec(xi)
    xi = xi - (xi.sum() - 1.0) / xi.size
    xi = np.clip(xi, 0.0, 1.0)
    s = xi.sum()
    if s <= 0:
        return np.full(xi.size, 1.0 / xi.size)
    return xi / s


def harmonic_step(i: int, xi=None, g=None) -> float:
    """The diminishing schedule 0.1 / (1 + i)."""
    return 0.1 / (1.0 + i)


def curvature_step(i: int, xi, g) -> float:
    """Reciprocal of the largest diagonal curvature ``g_a / (xi_a + eps0)`` of the flow.

    Coordinates near zero get tiny steps, so a start on a vertex or face
    grows away from it geometrically instead of overshooting.
    """
    return 1.0 / np.max(g / xi)


def natural_gradient_ascent(E, xi0, eps0: float = EPS0, steps: int = 20_000,
                            step_size: Callable | None = None,
                            sense: str = "max", tol: float = 1e-13) -> np.ndarray:
    """Projected natural-gradient iteration on ``J(phi) = phi . E``.

    ``step_size(i, xi, g)`` returns the step for iteration ``i``; the default
    is :func:`curvature_step`.  ``sense="min"`` mirrors the iteration
    (descent on negative ``E``).  Stops after ``steps`` updates or when an
    update moves less than ``tol``.
    """
    E = _check_sign(E, sense)
    step_size = curvature_step if step_size is None else step_size
    g_source = E if sense == "max" else -E
    xi = project_to_simplex(xi0)
    for i in range(steps):
        g = g_source / (xi + eps0)
        nxt = project_to_simplex(xi + step_size(i, xi + eps0, g) * g)
        moved = np.abs(nxt - xi).max()
        xi = nxt
        if moved < tol:
            break
    return xi


def _check_sign(E, sense: str) -> np.ndarray:
    E = _as_vec(E)
    if sense == "max":
        if np.any(E <= 0):
            raise SignError("maximization needs strictly positive expected fitness")
    elif sense == "min":
        if np.any(E >= 0):
            raise SignError("minimization needs strictly negative expected fitness")
    else:
        raise ValueError(f"unknown sense {sense!r}")
    return E


def fixed_point_coefficients(E, eps0: float = EPS0, sense: str = "max") -> np.ndarray:
    """Stationary coefficients of the natural-gradient flow.

    max: ``(E - eps0) / sum(E - eps0)``; min: the same on ``-E``.
    """
    E = _check_sign(E, sense)
    a = (E if sense == "max" else -E) - eps0
    if np.any(a <= 0):
        # |E| at or below eps0: fall back to the eps0 -> 0 limit
        a = np.abs(E)
    return a / a.sum()


def project_to_subsimplex(phi, labels: Sequence, retained: Sequence):
    """Drop coefficients outside ``retained`` and renormalize the rest.

    Returns ``(coefficients aligned with retained, flagged)``; ``flagged`` is
    True when the retained mass was zero and a uniform vector was used.
    """
    phi = _as_vec(phi)
    index = {lab: i for i, lab in enumerate(labels)}
    if not retained:
        raise ValueError("retained set is empty")
    sub = np.array([phi[index[lab]] for lab in retained])
    s = sub.sum()
    if s <= 0:
        return np.full(len(retained), 1.0 / len(retained)), True
    return sub / s, False
