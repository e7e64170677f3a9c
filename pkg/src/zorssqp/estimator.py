"""Reduced SQP models from two-point differences or exact projections."""

from dataclasses import dataclass

import numpy as np

from .problem import Unsupported

__all__ = [
    "InvalidRadius",
    "ReducedModel",
    "default_radius",
    "build_reduced_model",
    "build_exact_model",
]


class InvalidRadius(ValueError):
    pass


@dataclass(frozen=True)
class ReducedModel:
    """
    Data of ``min <c_hat, a> + (L/2)|a|^2 s.t. h_t + A_hat a = 0, g_t + B_hat a <= 0``.

    ``f_t`` is the objective at the center, kept for the merit function.
    ``r`` is the smoothing radius (0 for exact models).
    """

    c_hat: np.ndarray
    A_hat: np.ndarray
    B_hat: np.ndarray
    h_t: np.ndarray
    g_t: np.ndarray
    f_t: float
    L: float
    r: float = 0.0

    def __post_init__(self):
        d = self.c_hat.shape[0]
        if self.A_hat.shape != (self.h_t.shape[0], d) or self.B_hat.shape != (self.g_t.shape[0], d):
            raise ValueError("inconsistent reduced model dimensions")
        if not self.L > 0:
            raise ValueError("L must be positive")
        if self.r < 0:
            raise ValueError("r must be nonnegative")

    @property
    def d(self):
        return self.c_hat.shape[0]

    @property
    def m_e(self):
        return self.h_t.shape[0]

    @property
    def m_i(self):
        return self.g_t.shape[0]

    def objective(self, alpha):
        return float(self.c_hat @ alpha + 0.5 * self.L * (alpha @ alpha))

    def scaled(self, s):
        """Model with ``(c_hat, L)`` multiplied by ``s``."""
        return ReducedModel(s * self.c_hat, self.A_hat, self.B_hat, self.h_t,
                            self.g_t, self.f_t, s * self.L, self.r)


def default_radius(x):
    return 1e-4 * max(1.0, float(np.max(np.abs(x))))


def build_reduced_model(problem, x, U, r, L, counter=None):
    """
    Two-point model along the columns of `U`.

    Consumes exactly ``2 d + 1`` oracle evaluations: ``x +- r u_j`` for each
    column, in order ``j = 1..d``, then the center.

    Parameters
    ----------
    problem : BlackBoxProblem
    x : numpy.ndarray, shape (n,)
    U : numpy.ndarray, shape (n, d)
        Orthonormal columns.
    r : float
        Smoothing radius.
    L : float
        Proximal weight carried into the model.
    counter : EvalCounter, optional
        Defaults to the problem's own counter.

    Returns
    -------
    ReducedModel
    """
    if not r > 0:
        raise InvalidRadius(f"smoothing radius must be positive, got {r}")
    x = np.asarray(x, dtype=float)
    d = U.shape[1]
    me, mi = problem.dims.m_e, problem.dims.m_i
    c_hat = np.empty(d)
    A_hat = np.empty((me, d))
    B_hat = np.empty((mi, d))
    for j in range(d):
        step = r * U[:, j]
        plus = problem.evaluate(x + step, counter)
        minus = problem.evaluate(x - step, counter)
        c_hat[j] = (plus.f - minus.f) / (2 * r)
        A_hat[:, j] = (plus.h - minus.h) / (2 * r)
        B_hat[:, j] = (plus.g - minus.g) / (2 * r)
    center = problem.evaluate(x, counter)
    return ReducedModel(c_hat, A_hat, B_hat, center.h, center.g, center.f, float(L), float(r))


def build_exact_model(problem, x, U, L, counter=None):
    """Model from analytic gradients projected onto `U`; one center evaluation."""
    if not problem.has_gradients:
        raise Unsupported(f"{problem.name} is gradient-free")
    info = problem.gradients(x)
    center = problem.evaluate(x, counter)
    return ReducedModel(U.T @ info.grad_f, info.J_h @ U, info.J_g @ U,
                        center.h, center.g, center.f, float(L), 0.0)
