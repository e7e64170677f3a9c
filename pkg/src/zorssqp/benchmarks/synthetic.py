"""Quadratic objective with a cubic equality and quadratic bound constraints."""

from dataclasses import dataclass

import numpy as np

from ..problem import BlackBoxProblem, ProblemDims
from ..subspace import make_rng

__all__ = ["SyntheticNlpSpec", "make_synthetic_nlp"]


@dataclass(frozen=True)
class SyntheticNlpSpec:
    n: int = 100
    m_ineq: int = 10
    seed: int = 0

    def matrices(self):
        """``Q = M^T M / n + I`` and ``p``, both from the seeded stream."""
        rng = make_rng(self.seed)
        M = rng.standard_normal((self.n, self.n))
        Q = M.T @ M / self.n + np.eye(self.n)
        p = rng.standard_normal(self.n)
        return Q, p


def make_synthetic_nlp(n=100, m_ineq=10, seed=0, x0=None):
    """
    Build ``min x^T Q x / 2 + p^T x`` subject to

        sum(x) + 0.1 sum(x**3) - 1 = 0
        x_i**2 - 0.5 <= 0,  i < m_ineq

    with analytic gradients attached for metrics.
    """
    if n < 1 or not 0 <= m_ineq <= n:
        raise ValueError(f"need n >= 1 and 0 <= m_ineq <= n, got {n}, {m_ineq}")
    spec = SyntheticNlpSpec(n, m_ineq, seed)
    Q, p = spec.matrices()

    def fun(x):
        f = 0.5 * x @ Q @ x + p @ x
        h = np.sum(x) + 0.1 * np.sum(x ** 3) - 1.0
        g = x[:m_ineq] ** 2 - 0.5
        return f, [h], g

    def grad(x):
        Jg = np.zeros((m_ineq, n))
        Jg[np.arange(m_ineq), np.arange(m_ineq)] = 2 * x[:m_ineq]
        return Q @ x + p, (1.0 + 0.3 * x ** 2)[None, :], Jg

    prob = BlackBoxProblem(fun, ProblemDims(n, 1, m_ineq), x0=x0, grad=grad,
                           name=f"synthetic-n{n}-m{m_ineq}-s{seed}", concurrent_safe=True)
    prob.spec = spec
    prob.Q, prob.p = Q, p
    return prob
