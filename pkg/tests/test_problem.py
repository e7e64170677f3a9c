import threading

import numpy as np
import pytest
from numpy.testing import assert_allclose

from zorssqp.benchmarks.synthetic import make_synthetic_nlp
from zorssqp.problem import (BlackBoxProblem, DimensionMismatch, EvalCounter, NonFiniteOutput,
                             ProblemDims, Unsupported, evaluate, gradients)


@pytest.fixture
def synth():
    return make_synthetic_nlp(n=6, m_ineq=3, seed=0)


class TestEvaluate:

    def test_origin(self, synth):
        ev = synth.evaluate(np.zeros(6))
        assert_allclose(ev.h, [-1.0])
        assert_allclose(ev.g, [-0.5] * 3)

    def test_first_basis_vector(self, synth):
        ev = evaluate(synth, np.eye(6)[0])
        assert_allclose(ev.h, [0.1], atol=1e-15)
        assert_allclose(ev.g, [0.5, -0.5, -0.5])

    def test_counter(self, synth):
        assert synth.counter.n_full == 0
        for k in range(4):
            synth.evaluate(np.full(6, float(k % 2)))
        assert synth.counter.n_full == 4
        assert synth.counter.n_points == 2
        synth.counter.reset()
        assert synth.counter.n_full == 0

    def test_explicit_counter(self, synth):
        c = EvalCounter()
        synth.evaluate(np.zeros(6), c)
        assert c.n_full == 1
        assert synth.counter.n_full == 0

    def test_wrong_input_shape(self, synth):
        with pytest.raises(DimensionMismatch):
            synth.evaluate(np.zeros(5))

    def test_wrong_output_shape(self):
        p = BlackBoxProblem(lambda x: (0.0, [0.0, 0.0], []), ProblemDims(2, 1, 0))
        with pytest.raises(DimensionMismatch):
            p.evaluate(np.zeros(2))

    def test_non_finite_is_counted(self):
        p = BlackBoxProblem(lambda x: (np.nan, [], []), ProblemDims(1))
        with pytest.raises(NonFiniteOutput):
            p.evaluate(np.zeros(1))
        assert p.counter.n_full == 1

    def test_invalid_dims(self):
        with pytest.raises(ValueError):
            ProblemDims(0)

    def test_thread_safe_counter(self, synth):
        def work():
            for _ in range(200):
                synth.evaluate(np.zeros(6))
        threads = [threading.Thread(target=work) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert synth.counter.n_full == 800


class TestGradients:

    def test_quadratic(self):
        rng = np.random.default_rng(0)
        Q = rng.standard_normal((4, 4))
        Q = Q + Q.T
        p = rng.standard_normal(4)
        prob = BlackBoxProblem(lambda x: (0.5 * x @ Q @ x + p @ x, [], []), ProblemDims(4),
                               grad=lambda x: (Q @ x + p, np.zeros((0, 4)), np.zeros((0, 4))))
        x = rng.standard_normal(4)
        assert_allclose(gradients(prob, x).grad_f, Q @ x + p)

    def test_synthetic_constraint_jacobians(self, synth):
        x = np.linspace(-1, 1, 6)
        info = synth.gradients(x)
        assert_allclose(info.J_h[0], 1 + 0.3 * x ** 2)
        expect = np.zeros((3, 6))
        expect[np.arange(3), np.arange(3)] = 2 * x[:3]
        assert_allclose(info.J_g, expect)

    def test_gradient_free(self):
        p = BlackBoxProblem(lambda x: (0.0, [], []), ProblemDims(1))
        assert not p.has_gradients
        with pytest.raises(Unsupported):
            p.gradients(np.zeros(1))
