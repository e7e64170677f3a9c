import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from zorssqp.linalg import RankDeficient, SingularSystem, solve_saddle, thin_qr
from zorssqp.subspace import make_rng


class TestThinQR:

    def test_identity_columns(self):
        G = np.eye(5)[:, :3]
        Q, R = thin_qr(G)
        assert_allclose(Q, G, atol=1e-15)
        assert_allclose(R, np.eye(3), atol=1e-15)

    def test_scaled_basis_vector(self):
        Q, R = thin_qr(np.array([[2.0], [0.0], [0.0]]))
        assert_allclose(Q, [[1.0], [0.0], [0.0]])
        assert_allclose(R, [[2.0]])

    def test_seeded_gaussian(self):
        G = make_rng(3).standard_normal((10, 3))
        Q, R = thin_qr(G)
        assert_allclose(Q.T @ Q, np.eye(3), atol=1e-10)
        assert_allclose(Q @ R, G, atol=1e-10)
        assert np.all(np.diag(R) > 0)
        assert_allclose(R, np.triu(R))

    def test_sign_fix_for_negative_pivot(self):
        Q, R = thin_qr(np.array([[-3.0], [0.0]]))
        assert R[0, 0] == 3.0
        assert_allclose(Q[:, 0], [-1.0, 0.0])

    def test_rank_deficient(self):
        G = np.ones((4, 2))
        with pytest.raises(RankDeficient):
            thin_qr(G)

    def test_rank_deficient_is_linalg_error(self):
        assert issubclass(RankDeficient, np.linalg.LinAlgError)

    @pytest.mark.parametrize("shape", [(2, 3), (4,)])
    def test_bad_shapes(self, shape):
        with pytest.raises(ValueError):
            thin_qr(np.ones(shape))

    def test_non_finite(self):
        G = np.eye(3)
        G[0, 0] = np.nan
        with pytest.raises(ValueError):
            thin_qr(G)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32), n=st.integers(1, 12), frac=st.floats(0.05, 1.0))
    def test_factorization_property(self, seed, n, frac):
        d = max(1, int(round(frac * n)))
        G = make_rng(seed).standard_normal((n, d))
        Q, R = thin_qr(G)
        assert_allclose(Q.T @ Q, np.eye(d), atol=1e-12)
        assert_allclose(Q @ R, G, atol=1e-10)
        assert np.all(np.diag(R) >= 0)


class TestSolveSaddle:

    def test_unconstrained(self):
        a, y = solve_saddle(1.0, np.zeros((0, 2)), np.array([1.0, 0.0]), np.zeros(0))
        assert_allclose(a, [-1.0, 0.0])
        assert y.shape == (0,)

    def test_single_equality(self):
        a, y = solve_saddle(1.0, np.array([[1.0, 0.0]]), np.zeros(2), np.array([1.0]))
        assert_allclose(a, [1.0, 0.0], atol=1e-14)
        assert_allclose(y, [-1.0], atol=1e-14)

    def test_inactive_multiplier(self):
        a, y = solve_saddle(2.0, np.array([[1.0, 1.0]]), np.array([1.0, -1.0]), np.array([0.0]))
        assert_allclose(a, [-0.5, 0.5], atol=1e-14)
        assert_allclose(y, [0.0], atol=1e-14)

    def test_dependent_rows(self):
        E = np.array([[1.0, 0.0], [2.0, 0.0]])
        with pytest.raises(SingularSystem):
            solve_saddle(1.0, E, np.zeros(2), np.zeros(2))

    def test_too_many_rows(self):
        with pytest.raises(SingularSystem):
            solve_saddle(1.0, np.eye(3)[:, :2], np.zeros(2), np.zeros(3))

    def test_nonpositive_L(self):
        with pytest.raises(ValueError):
            solve_saddle(0.0, np.zeros((0, 2)), np.zeros(2), np.zeros(0))

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32), d=st.integers(1, 8), k=st.integers(0, 8),
           L=st.floats(0.1, 10.0))
    def test_kkt_system_satisfied(self, seed, d, k, L):
        k = min(k, d)
        rng = make_rng(seed)
        E = rng.standard_normal((k, d))
        c, b = rng.standard_normal(d), rng.standard_normal(k)
        a, y = solve_saddle(L, E, c, b)
        # compare with a dense solve of the full KKT matrix
        K = np.block([[L * np.eye(d), E.T], [E, np.zeros((k, k))]])
        sol = np.linalg.solve(K, np.concatenate([-c, b]))
        scale = 1 + np.abs(sol).max()
        assert_allclose(a, sol[:d], atol=1e-8 * scale)
        assert_allclose(y, sol[d:], atol=1e-8 * scale)
