import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from zorssqp.estimator import ReducedModel
from zorssqp.qp import (QPStatus, TooManyConstraints, brute_force_qp, kkt_residuals,
                        min_total_violation, solve_reduced_qp)
from zorssqp.subspace import make_rng


def model(c, A=None, B=None, h=None, g=None, L=1.0):
    c = np.asarray(c, dtype=float)
    d = c.shape[0]
    A = np.zeros((0, d)) if A is None else np.atleast_2d(np.asarray(A, dtype=float))
    B = np.zeros((0, d)) if B is None else np.atleast_2d(np.asarray(B, dtype=float))
    h = np.zeros(A.shape[0]) if h is None else np.asarray(h, dtype=float)
    g = np.zeros(B.shape[0]) if g is None else np.asarray(g, dtype=float)
    return ReducedModel(c, A, B, h, g, 0.0, L)


def random_model(seed, d_max=6, me_max=2, mi_max=5):
    rng = make_rng(seed)
    d = int(rng.integers(1, d_max + 1))
    me = int(rng.integers(0, min(me_max, d) + 1))
    mi = int(rng.integers(0, mi_max + 1))
    return ReducedModel(rng.standard_normal(d), rng.standard_normal((me, d)),
                        rng.standard_normal((mi, d)), rng.standard_normal(me),
                        rng.standard_normal(mi), 0.0, float(rng.choice([0.5, 1.0, 5.0])))


SOLVERS = [solve_reduced_qp, brute_force_qp]


@pytest.mark.parametrize("solve", SOLVERS, ids=["active_set", "enumeration"])
class TestKnownSolutions:

    def test_unconstrained(self, solve):
        out = solve(model([1.0, 1.0]))
        assert out.status is QPStatus.OPTIMAL
        assert_allclose(out.alpha, [-1.0, -1.0])
        assert out.lam.shape == (0,) and out.mu.shape == (0,)

    def test_active_inequality(self, solve):
        out = solve(model([1.0, 1.0], B=[[1.0, 0.0]], g=[1.5]))
        assert out.optimal
        assert_allclose(out.alpha, [-1.5, -1.0], atol=1e-12)
        assert_allclose(out.mu, [0.5], atol=1e-12)

    def test_inactive_inequality(self, solve):
        out = solve(model([1.0, 1.0], B=[[1.0, 0.0]], g=[0.5]))
        assert_allclose(out.alpha, [-1.0, -1.0], atol=1e-12)
        assert_allclose(out.mu, [0.0])

    def test_infeasible(self, solve):
        out = solve(model([0.0, 0.0], A=[[1.0, 0.0]], h=[0.0], B=[[1.0, 0.0]], g=[1.0]))
        assert out.status is QPStatus.INFEASIBLE
        assert not out.optimal

    def test_equality_only(self, solve):
        out = solve(model([0.0, 0.0], A=[[1.0, 0.0]], h=[-1.0]))
        assert_allclose(out.alpha, [1.0, 0.0], atol=1e-12)
        assert_allclose(out.lam, [-1.0], atol=1e-12)

    def test_redundant_consistent_equalities(self, solve):
        out = solve(model([1.0, 0.0], A=[[1.0, 1.0], [2.0, 2.0]], h=[-1.0, -2.0]))
        assert out.optimal
        assert_allclose(out.alpha.sum(), 1.0, atol=1e-10)
        assert out.kkt_residual < 1e-10


class TestSolveReducedQP:

    def test_residual_report(self):
        out = solve_reduced_qp(model([1.0, 1.0], B=[[1.0, 0.0]], g=[1.5]))
        res = kkt_residuals(model([1.0, 1.0], B=[[1.0, 0.0]], g=[1.5]), out.alpha, out.lam, out.mu)
        assert set(res) == {"stationarity", "equality", "inequality", "complementarity",
                            "dual_sign"}
        assert max(res.values()) == pytest.approx(out.kkt_residual)
        assert out.kkt_residual < 1e-12

    def test_max_iterations(self):
        out = solve_reduced_qp(model([1.0, 1.0], B=[[1.0, 0.0]], g=[1.5]), max_iter=0)
        assert out.status is QPStatus.MAX_ITERATIONS
        assert not out.optimal

    def test_bad_tolerance(self):
        with pytest.raises(ValueError):
            solve_reduced_qp(model([1.0]), tol=0.0)

    @settings(max_examples=150, deadline=None)
    @given(seed=st.integers(0, 2**40))
    def test_agrees_with_enumeration(self, seed):
        m = random_model(seed)
        a, b = solve_reduced_qp(m), brute_force_qp(m)
        assert a.status is b.status
        if a.optimal:
            assert abs(m.objective(a.alpha) - m.objective(b.alpha)) <= 1e-8
            assert np.linalg.norm(a.alpha - b.alpha) <= 1e-6
            assert a.kkt_residual <= 1e-7

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**40), s=st.floats(0.1, 10.0))
    def test_scaling_covariance(self, seed, s):
        # multiplying (c, L) by s leaves alpha unchanged and scales the duals
        m = random_model(seed)
        a, b = solve_reduced_qp(m), solve_reduced_qp(m.scaled(s))
        assert a.status is b.status
        if a.optimal:
            assert_allclose(b.alpha, a.alpha, atol=1e-7 * (1 + np.abs(a.alpha).max()))
            assert_allclose(b.mu, s * a.mu, atol=1e-6 * s * (1 + np.abs(a.mu).max(initial=0)))

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**40))
    def test_feasibility_matches_phase_one(self, seed):
        m = random_model(seed)
        out = solve_reduced_qp(m)
        assert out.optimal == (min_total_violation(m) <= 1e-8)


class TestBruteForce:

    def test_refuses_large_sets(self):
        m = model(np.ones(2), B=np.ones((13, 2)), g=-np.ones(13))
        with pytest.raises(TooManyConstraints):
            brute_force_qp(m)

    def test_phase_one_value(self):
        m = model([0.0], A=[[1.0]], h=[0.0], B=[[1.0]], g=[1.0])
        assert min_total_violation(m) == pytest.approx(1.0)
