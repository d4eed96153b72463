"""Riemannian stochastic derivative-free optimization with mixture densities."""
from .geometry import GeometryError, Manifold, OutsideNormalNeighborhood
from .manifolds import Grassmann, JacobsLadder, LadderPoint, Sphere, heuristic_log, torus_index

__all__ = ["GeometryError", "Manifold", "OutsideNormalNeighborhood", "Grassmann", "JacobsLadder",
           "LadderPoint", "Sphere", "heuristic_log", "torus_index"]
