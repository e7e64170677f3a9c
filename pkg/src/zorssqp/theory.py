"""Empirical constants for checking the per-step merit and residual bounds."""

import numpy as np

from .subspace import make_rng

__all__ = ["lipschitz_estimates", "merit_constant", "gradient_bounds",
           "projected_residual"]


def lipschitz_estimates(problem, center, radius=0.5, n_pairs=200, seed=0):
    """
    Sampled gradient-Lipschitz constants around `center`.

    Pairs are drawn uniformly-in-direction inside a ball of the given
    `radius`, and each constant is the largest observed ratio
    ``|grad(x) - grad(y)| / |x - y|``. Requires analytic gradients.

    Returns
    -------
    ell_f : float
    ell_h : numpy.ndarray, shape (m_e,)
    ell_g : numpy.ndarray, shape (m_i,)
    """
    rng = make_rng(seed)
    n = problem.n
    center = np.asarray(center, dtype=float)
    ell_f = 0.0
    ell_h = np.zeros(problem.dims.m_e)
    ell_g = np.zeros(problem.dims.m_i)
    for _ in range(n_pairs):
        pts = []
        for _ in range(2):
            v = rng.standard_normal(n)
            v *= radius * rng.uniform() ** (1.0 / n) / np.linalg.norm(v)
            pts.append(center + v)
        x, y = pts
        dist = np.linalg.norm(x - y)
        gx, gy = problem.gradients(x), problem.gradients(y)
        ell_f = max(ell_f, np.linalg.norm(gx.grad_f - gy.grad_f) / dist)
        ell_h = np.maximum(ell_h, np.linalg.norm(gx.J_h - gy.J_h, axis=1) / dist)
        ell_g = np.maximum(ell_g, np.linalg.norm(gx.J_g - gy.J_g, axis=1) / dist)
    return ell_f, ell_h, ell_g


def merit_constant(ell_f, ell_h, ell_g, tau):
    """``ell_f / 2 + tau/2 sum(ell_h) + tau/2 sum(ell_g)``."""
    return 0.5 * ell_f + 0.5 * tau * float(np.sum(ell_h)) + 0.5 * tau * float(np.sum(ell_g))


def gradient_bounds(problem, points):
    """Largest constraint-gradient row norms ``(H_h, H_g)`` over `points`."""
    H_h = H_g = 0.0
    for x in points:
        info = problem.gradients(x)
        H_h = max(H_h, float(np.max(np.linalg.norm(info.J_h, axis=1), initial=0.0)))
        H_g = max(H_g, float(np.max(np.linalg.norm(info.J_g, axis=1), initial=0.0)))
    return H_h, H_g


def projected_residual(problem, x, U, lam, mu):
    """``|U^T (grad f + J_h^T lam + J_g^T mu)|`` at `x`."""
    info = problem.gradients(x)
    r = info.grad_f + info.J_h.T @ lam + info.J_g.T @ mu
    return float(np.linalg.norm(U.T @ r))
