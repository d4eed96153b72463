import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ersdfo import JacobsLadder, LadderPoint, Sphere
from ersdfo.core import (
    CmaParams,
    CoreSpec,
    init_state,
    log_weights,
    rcmaes_step,
    repair_covariance,
    rsdfo_step,
    run_core,
    transport_state,
)
from ersdfo.evaluation import BudgetExhausted, CountedObjective

import reference as ref

seeds = st.integers(0, 2**32 - 1)
L = JacobsLadder(2.0, 0.5)
A = np.array([[3.0, 0.8], [0.8, 1.0]])
CENTER = np.array([0.05, -0.04])


def quad(z):
    d = z - CENTER
    return float(d @ A @ d + 0.1 * math.sin(7 * d[0]))


def ladder_chart(p):
    return np.array([L.r * p.theta, L.R * (2 * math.pi * p.n + p.phi)])


# base point well inside one torus so small moves never wrap
X0 = LadderPoint(4, math.pi, math.pi)
Z0 = ladder_chart(X0)


def ladder_f(p):
    return quad(ladder_chart(p) - Z0)


def test_log_weights_frozen_values():
    # log(4/i) / (log 4 + log 2 + log 4/3), evaluated independently
    raw = np.log([4.0, 2.0, 4.0 / 3.0])
    assert np.allclose(log_weights(3), raw / raw.sum())
    assert np.allclose(log_weights(3), [0.58564511, 0.29282255, 0.12153234], atol=1e-6)
    assert log_weights(1).tolist() == [1.0]


def test_cma_constants_frozen():
    P = CmaParams.default(2, 40, 10)
    w, mu_eff, cs, cc, mu_cov, ccov, ds, chi = ref.cma_constants(2, 10)
    assert np.allclose(P.weights, w)
    assert (P.m_eff, P.c_sigma, P.c_c, P.c_cov, P.d_sigma, P.chi_n) == pytest.approx(
        (mu_eff, cs, cc, ccov, ds, chi))
    assert P.chi_n == pytest.approx(1.254272743, abs=1e-9)


def test_rsdfo_step_matches_euclidean_reference_on_ladder():
    state = init_state(L, X0, sigma=0.3)
    C = np.array([[1.0, 0.3], [0.3, 0.5]])
    state = replace(state, C=C)
    new = rsdfo_step(L, state, ladder_f, 30, 8, np.random.default_rng(5))
    mean, newC = ref.rsdfo_reference(np.zeros(2), C, 0.3, quad, 30, 8, np.random.default_rng(5), L.inj(X0))
    assert np.allclose(ladder_chart(new.mean) - Z0, mean, atol=1e-6)
    assert np.allclose(new.C, newC, atol=1e-6)


def test_rcmaes_step_matches_euclidean_reference_on_ladder():
    state = init_state(L, X0, sigma=0.4)
    ps, pc = np.array([0.2, -0.1]), np.array([0.05, 0.3])
    C = np.array([[1.2, -0.2], [-0.2, 0.7]])
    state = replace(state, C=C, p_sigma=ps, p_c=pc)
    P = CmaParams.default(2, 24, 6)
    new = rcmaes_step(L, state, ladder_f, P, np.random.default_rng(8))
    mean, rC, rs, rps, rpc = ref.cma_reference(np.zeros(2), C, 0.4, ps, pc, quad, 24, 6,
                                               np.random.default_rng(8), L.inj(X0))
    assert np.allclose(ladder_chart(new.mean) - Z0, mean, atol=1e-6)
    assert np.allclose(new.C, rC, atol=1e-6)
    assert new.sigma == pytest.approx(rs, abs=1e-6)
    assert np.allclose(new.p_sigma, rps, atol=1e-6)
    assert np.allclose(new.p_c, rpc, atol=1e-6)


def test_rsdfo_step_on_near_flat_sphere_chart():
    M = Sphere(2)
    x = np.array([0.0, 0.0, 1.0])
    state = init_state(M, x, sigma=1e-3)
    F = state.frame
    f = lambda y: quad(1e2 * (F @ y))
    new = rsdfo_step(M, state, f, 30, 8, np.random.default_rng(2))
    mean, C = ref.rsdfo_reference(np.zeros(2), np.eye(2), 1e-3, lambda c: quad(1e2 * c), 30, 8,
                                  np.random.default_rng(2), math.pi)
    assert np.allclose(F @ new.mean, mean, atol=1e-6)
    assert np.allclose(new.C, C, atol=1e-6)


def test_step_consumes_m1_evaluations():
    fc = CountedObjective(ladder_f)
    rsdfo_step(L, init_state(L, X0), fc, 17, 4, np.random.default_rng(0))
    assert fc.count == 17
    rcmaes_step(L, init_state(L, X0), fc, CmaParams.default(2, 11, 3), np.random.default_rng(0))
    assert fc.count == 28


def test_budget_exhaustion_aborts_step():
    fc = CountedObjective(ladder_f, budget=10)
    with pytest.raises(BudgetExhausted):
        rsdfo_step(L, init_state(L, X0), fc, 17, 4, np.random.default_rng(0))
    assert fc.count == 10


@given(seed=seeds)
def test_constant_objective_keeps_covariance_positive(seed):
    M = Sphere(2)
    rng = np.random.default_rng(seed)
    state = init_state(M, M.random_point(rng))
    for _ in range(3):
        state = rsdfo_step(M, state, lambda y: 1.0, 12, 3, rng)
        assert np.linalg.eigvalsh(state.C).min() > 0
        assert M.check_point(state.mean)


@given(seed=seeds)
def test_step_is_deterministic(seed):
    M = Sphere(2)
    x = M.random_point(np.random.default_rng(seed))
    f = lambda y: float(y[0] ** 2 - y[2])
    a = rcmaes_step(M, init_state(M, x), f, CmaParams.default(2, 10), np.random.default_rng(seed))
    b = rcmaes_step(M, init_state(M, x), f, CmaParams.default(2, 10), np.random.default_rng(seed))
    assert np.array_equal(a.mean, b.mean) and np.array_equal(a.C, b.C) and a.sigma == b.sigma


def test_transport_state_identity_and_loop():
    M = Sphere(2)
    rng = np.random.default_rng(1)
    x = M.random_point(rng)
    s = init_state(M, x, rng=rng)
    same = transport_state(M, s, x)
    assert np.allclose(same.frame, s.frame)
    y = M.exp(x, 0.8 * M.random_tangent(x, rng) / 2)
    back = transport_state(M, transport_state(M, s, y), x)
    assert np.allclose(back.frame, s.frame, atol=1e-9)
    assert np.array_equal(back.C, s.C)


def test_step_never_leaves_injectivity_ball():
    M = Sphere(2)
    rng = np.random.default_rng(3)
    x = M.random_point(rng)
    s = init_state(M, x, sigma=50.0)
    new = rsdfo_step(M, s, lambda y: -float(y @ -x), 20, 1, rng)
    assert M.dist(x, new.mean) <= 0.95 * math.pi + 1e-9


def test_repair_covariance_lifts_bad_eigenvalues():
    C, fixed = repair_covariance(np.array([[1.0, 0.0], [0.0, -1e-3]]))
    assert fixed and np.linalg.eigvalsh(C).min() > 0
    C, fixed = repair_covariance(np.eye(2))
    assert not fixed


@pytest.mark.parametrize("kind", ["generic", "rcmaes"])
def test_core_converges_on_a_bowl(kind):
    M = Sphere(2)
    target = np.array([0.0, 0.0, 1.0])
    f = CountedObjective(lambda y: M.dist(y, target) ** 2, budget=40_000)
    x0 = np.array([1.0, 0.0, 0.0])
    s = run_core(M, x0, f, CoreSpec(kind, 20, 5), np.random.default_rng(0))
    assert s.terminated
    assert M.dist(s.mean, target) < 1e-4


def test_sigma_unchanged_when_path_length_is_expected_norm():
    P = CmaParams.default(2, 16, 4)
    seed_state = init_state(L, X0, sigma=0.3)
    first = rcmaes_step(L, seed_state, ladder_f, P, np.random.default_rng(6))
    # with p_sigma = 0 the new path is exactly the step contribution
    u = np.array([0.6, 0.8])
    p0 = (P.chi_n * u - first.p_sigma) / (1 - P.c_sigma)
    again = rcmaes_step(L, replace(seed_state, p_sigma=p0), ladder_f, P, np.random.default_rng(6))
    assert np.linalg.norm(again.p_sigma) == pytest.approx(P.chi_n)
    assert again.sigma == pytest.approx(0.3, rel=1e-12)


@given(seed=seeds)
def test_selection_invariant_under_monotone_transform(seed):
    M = Sphere(2)
    x = M.random_point(np.random.default_rng(seed))
    f = lambda y: float(y[0] - 0.3 * y[1] * y[2])
    g = lambda y: math.exp(3 * f(y)) - 7
    a = rsdfo_step(M, init_state(M, x), f, 15, 4, np.random.default_rng(seed))
    b = rsdfo_step(M, init_state(M, x), g, 15, 4, np.random.default_rng(seed))
    assert np.array_equal(a.mean, b.mean) and np.array_equal(a.C, b.C)
