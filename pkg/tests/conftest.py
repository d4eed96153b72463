import math

import pytest
from hypothesis import settings

from ersdfo import Grassmann, JacobsLadder, Sphere

settings.register_profile("default", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("default")

MANIFOLDS = {
    "S2": lambda: Sphere(2),
    "S5": lambda: Sphere(5),
    "Gr24": lambda: Grassmann(2, 4),
    "Gr25": lambda: Grassmann(2, 5),
    "ladder": lambda: JacobsLadder(2.0, 0.5),
}


@pytest.fixture(params=sorted(MANIFOLDS))
def manifold(request):
    return MANIFOLDS[request.param]()


def tangent_in_ball(M, x, rng, frac=0.999):
    """Random tangent vector with norm uniform in [0, frac * inj(x))."""
    v = M.random_tangent(x, rng)
    v = v / M.norm(x, v)
    return v * rng.uniform(0, frac) * M.inj(x)


def ladder_single_torus_pair(M, rng):
    """Base point and tangent whose geodesic stays on the base point's torus."""
    x = M.random_point(rng)
    x = type(x)(x.n, x.theta, float(rng.uniform(0.3 * math.pi, 1.7 * math.pi)))
    v = tangent_in_ball(M, x, rng)
    return x, v


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
