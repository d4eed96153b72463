import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ersdfo import (
    Grassmann,
    JacobsLadder,
    LadderPoint,
    OutsideNormalNeighborhood,
    Sphere,
    heuristic_log,
    torus_index,
)

seeds = st.integers(0, 2**32 - 1)
E1, E2, E3 = np.eye(3)


# --- sphere -----------------------------------------------------------------

def test_sphere_exp_examples():
    M = Sphere(2)
    assert np.allclose(M.exp(E1, np.zeros(3)), E1)
    assert np.allclose(M.exp(E1, math.pi / 2 * E2), E2, atol=1e-15)
    assert np.allclose(M.exp(E1, math.pi * E2), -E1, atol=1e-15)
    assert np.allclose(M.exp(E1, 2 * math.pi * E2), E1, atol=1e-14)


def test_sphere_log_and_distance_examples():
    M = Sphere(2)
    assert np.allclose(M.log(E1, E2), math.pi / 2 * E2)
    assert M.dist(E1, E2) == pytest.approx(math.pi / 2, abs=1e-15)
    assert M.inj(E1) == math.pi


def test_sphere_frame_at_pole():
    M = Sphere(2)
    F = M.frame(E3)
    assert np.allclose(F @ F.T, np.eye(2))
    assert np.allclose(F @ E3, 0)


def test_sphere_log_of_antipode_is_undefined():
    with pytest.raises(OutsideNormalNeighborhood):
        Sphere(2).log(E1, -E1)


@given(seed=seeds)
def test_sphere_distance_matches_arccos(seed):
    M = Sphere(5)
    rng = np.random.default_rng(seed)
    x, y = M.random_point(rng), M.random_point(rng)
    assert M.dist(x, y) == pytest.approx(math.acos(np.clip(x @ y, -1, 1)), abs=1e-7)


# --- Grassmannian -----------------------------------------------------------

def _grassmann_oracle_dist(X, Y):
    s = np.clip(np.linalg.svd(X.T @ Y, compute_uv=False), -1, 1)
    return float(np.linalg.norm(np.arccos(s)))


def test_grassmann_injectivity_radius():
    assert Grassmann(2, 5).inj(np.eye(5, 2)) == math.pi / 2
    assert Grassmann(2, 4).inj(np.eye(4, 2)) == math.pi / 2


def test_grassmann_exp_zero_and_same_span():
    M = Grassmann(2, 4)
    X = np.eye(4, 2)
    assert np.allclose(M.exp(X, np.zeros((4, 2))), X)
    Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((2, 2)))
    assert M.dist(X, X @ Q) < 1e-7


def test_grassmann_single_rotation_angle():
    # rotate e1 toward e3 by a: the span moves by exactly a
    M = Grassmann(2, 4)
    X = np.eye(4, 2)
    a = 0.7
    Y = X.copy()
    Y[:, 0] = [math.cos(a), 0, math.sin(a), 0]
    assert M.dist(X, Y) == pytest.approx(a, abs=1e-14)
    V = M.log(X, Y)
    assert np.allclose(V, np.outer([0, 0, a, 0], [1, 0]), atol=1e-13)


@given(seed=seeds)
def test_grassmann_distance_matches_svd_arccos(seed):
    M = Grassmann(2, 5)
    rng = np.random.default_rng(seed)
    X, Y = M.random_point(rng), M.random_point(rng)
    # arccos loses precision near zero angles, so compare loosely
    assert M.dist(X, Y) == pytest.approx(_grassmann_oracle_dist(X, Y), abs=1e-6)


@given(seed=seeds)
def test_grassmann_log_is_representative_free(seed):
    M = Grassmann(2, 5)
    rng = np.random.default_rng(seed)
    X = M.random_point(rng)
    V = M.proj(X, rng.standard_normal((5, 2)))
    V *= 0.9 * M.inj(X) / np.linalg.norm(V)
    Y = M.exp(X, V)
    Q, _ = np.linalg.qr(rng.standard_normal((2, 2)))
    assert np.allclose(M.log(X, Y @ Q), V, atol=1e-8)


# --- Jacob's ladder ---------------------------------------------------------

L = JacobsLadder(2.0, 0.5)


def test_ladder_injectivity_is_half_minor_circle():
    assert L.inj(LadderPoint(0, 0.0, 0.0)) == pytest.approx(math.pi * 0.5)


def test_ladder_exp_zero_and_minor_motion():
    x = LadderPoint(3, 1.0, 2.0)
    assert L.exp(x, [0.0, 0.0]) == x
    y = L.exp(x, [0.5 * 2.0, 0.0])
    assert y.n == 3 and y.phi == 2.0 and y.theta == pytest.approx(3.0)


def test_ladder_major_motion_crosses_one_junction():
    x = LadderPoint(0, 0.4, 0.0)
    y = L.exp(x, [0.0, 2.0 * (2 * math.pi + 0.1)])
    assert (y.n, y.theta) == (1, 0.4)
    assert y.phi == pytest.approx(0.1, abs=1e-12)
    assert torus_index(y) == torus_index(x) + 1


def test_ladder_negative_crossing_decrements_index():
    x = LadderPoint(5, 0.4, 0.05)
    y = L.exp(x, [0.0, -2.0 * 0.1])
    assert y.n == 4
    assert y.phi == pytest.approx(2 * math.pi - 0.05, abs=1e-12)


def test_ladder_distance_examples():
    x = LadderPoint(0, 0.0, 1.0)
    assert L.dist(x, x) == 0
    assert L.dist(x, LadderPoint(0, math.pi, 1.0)) == pytest.approx(math.pi * 0.5)
    # across a junction the chain development is used
    a, b = LadderPoint(0, 0.0, 2 * math.pi - 0.1), LadderPoint(1, 0.0, 0.1)
    assert L.dist(a, b) == pytest.approx(2.0 * 0.2)


def test_ladder_log_refuses_far_points():
    with pytest.raises(OutsideNormalNeighborhood):
        L.log(LadderPoint(0, 0.0, 1.0), LadderPoint(0, math.pi, 1.0))


@given(seed=seeds)
def test_ladder_exp_log_roundtrip_across_junctions(seed):
    rng = np.random.default_rng(seed)
    x = L.random_point(rng)
    v = rng.standard_normal(2)
    v *= rng.uniform(0, 0.999) * L.inj(x) / np.linalg.norm(v)
    assert np.allclose(L.log(x, L.exp(x, v)), v, atol=1e-10)


@given(seed=seeds)
def test_ladder_loop_transport_is_trivial(seed):
    rng = np.random.default_rng(seed)
    x = L.random_point(rng)
    w = rng.standard_normal(2)
    y = L.exp(x, rng.standard_normal(2))
    assert np.allclose(L.transp(y, x, L.transp(x, y, w)), w)


def test_heuristic_log_cases():
    x = LadderPoint(2, 1.0, 1.0)
    assert np.allclose(heuristic_log(L, x, x), 0)
    assert np.allclose(heuristic_log(L, x, LadderPoint(3, 5.0, 4.0)), [0.0, 1.0])
    assert np.allclose(heuristic_log(L, x, LadderPoint(1, 5.0, 4.0)), [0.0, -1.0])
    assert np.allclose(heuristic_log(L, x, LadderPoint(5, 1.0, 1.0)), 0)
    same = LadderPoint(2, 1.2, 3.0)
    assert np.allclose(heuristic_log(L, x, same), [0.5 * 0.2, 2.0 * 2.0])


def test_ladder_serialization_roundtrip():
    x = LadderPoint(-7, 0.25, 6.0)
    assert L.from_list(L.to_list(x)) == x
