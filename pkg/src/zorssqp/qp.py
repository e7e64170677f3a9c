"""
Reduced proximal QP

    min  <c, a> + (L/2) |a|^2
    s.t. h + A a = 0       (multipliers lam)
         g + B a <= 0      (multipliers mu >= 0)

solved by a dual active-set method, plus an enumeration oracle for testing.
"""

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .linalg import SingularSystem, solve_saddle

__all__ = [
    "QPStatus",
    "QPOutcome",
    "TooManyConstraints",
    "kkt_residuals",
    "solve_reduced_qp",
    "brute_force_qp",
    "min_total_violation",
]

DEFAULT_TOL = 1e-8
# a direction this much shorter than the constraint normal counts as zero
_DEP_TOL = 1e-10


class QPStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITERATIONS = "max_iterations"
    DEGENERATE = "degenerate"


class TooManyConstraints(ValueError):
    pass


@dataclass
class QPOutcome:
    status: QPStatus
    alpha: np.ndarray = None
    lam: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mu: np.ndarray = field(default_factory=lambda: np.zeros(0))
    kkt_residual: float = np.inf
    iterations: int = 0

    @property
    def optimal(self):
        return self.status is QPStatus.OPTIMAL


def kkt_residuals(model, alpha, lam, mu):
    """Stationarity, equality, inequality, complementarity and dual-sign residuals."""
    stat = model.c_hat + model.L * alpha + model.A_hat.T @ lam + model.B_hat.T @ mu
    eq = model.h_t + model.A_hat @ alpha
    ineq = model.g_t + model.B_hat @ alpha
    return {
        "stationarity": float(np.linalg.norm(stat)),
        "equality": float(np.max(np.abs(eq), initial=0.0)),
        "inequality": float(np.max(ineq, initial=0.0)),
        "complementarity": float(np.max(np.abs(mu * ineq), initial=0.0)),
        "dual_sign": float(np.max(-mu, initial=0.0)),
    }


def _finish(model, alpha, lam, mu, iterations):
    res = kkt_residuals(model, alpha, lam, mu)
    return QPOutcome(QPStatus.OPTIMAL, alpha, lam, mu, max(res.values()), iterations)


def _directions(N, npl, L):
    """Primal step ``z`` and dual change ``r`` for adding normal `npl` to basis `N`."""
    if N.shape[1] == 0:
        return npl / L, np.zeros(0)
    Q, R = np.linalg.qr(N, mode="reduced")
    Qtn = Q.T @ npl
    z = (npl - Q @ Qtn) / L
    r = np.linalg.solve(R, Qtn)
    return z, r


def solve_reduced_qp(model, tol=DEFAULT_TOL, max_iter=None):
    """
    Solve the reduced QP of `model` with a dual active-set method.

    Starts at the unconstrained minimizer ``-c/L``, imposes the equality rows
    one at a time, then repeatedly adds the most violated inequality (lowest
    index on ties). Adding a constraint moves the primal point and the
    multipliers along a line; a blocking multiplier that reaches zero drops
    its constraint. Every iterate is optimal for the constraints in the
    working set, so the first iterate with no violation above `tol` is the
    solution. A constraint that can be neither reached nor traded against a
    droppable one certifies infeasibility.

    Parameters
    ----------
    model : ReducedModel
    tol : float, optional
        Feasibility tolerance.
    max_iter : int, optional
        Bound on working-set changes, ``50 (m_e + m_i + 1)`` by default.

    Returns
    -------
    QPOutcome
        Statuses are values, never exceptions.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    d, me, mi, L = model.d, model.m_e, model.m_i, model.L
    if max_iter is None:
        max_iter = 50 * (me + mi + 1)
    # constraint k reads normals[:, k] . a >= bounds[k] (equalities hold with =)
    normals = np.hstack([model.A_hat.T, -model.B_hat.T])
    bounds = np.concatenate([-model.h_t, model.g_t])
    norms = np.linalg.norm(normals, axis=0)

    alpha = -model.c_hat / L
    active = []
    u = np.zeros(0)
    iterations = 0

    for p in range(me):
        npl = normals[:, p]
        s = npl @ alpha - bounds[p]
        z, r = _directions(normals[:, active], npl, L)
        if L * np.linalg.norm(z) <= _DEP_TOL * max(norms[p], 1.0):
            if abs(s) <= tol:
                continue  # dependent but consistent row, lam_p = 0
            return QPOutcome(QPStatus.INFEASIBLE, iterations=iterations)
        t = -s / (z @ npl)
        alpha = alpha + t * z
        u = np.append(u - t * r, t)
        active.append(p)
        iterations += 1

    while True:
        slack = normals[:, me:].T @ alpha - bounds[me:]
        slack[[k - me for k in active if k >= me]] = np.inf
        if mi == 0 or np.min(slack) >= -tol:
            break
        p = me + int(np.argmin(slack))
        npl = normals[:, p]
        u_p = 0.0
        while True:
            if iterations >= max_iter:
                return QPOutcome(QPStatus.MAX_ITERATIONS, iterations=iterations)
            try:
                z, r = _directions(normals[:, active], npl, L)
            except np.linalg.LinAlgError:
                return QPOutcome(QPStatus.DEGENERATE, iterations=iterations)
            t1, k = np.inf, None
            for j, idx in enumerate(active):
                if idx >= me and r[j] > 0:
                    ratio = u[j] / r[j]
                    if ratio < t1:
                        t1, k = ratio, j
            if L * np.linalg.norm(z) > _DEP_TOL * max(norms[p], 1.0):
                s_p = npl @ alpha - bounds[p]
                t2 = -s_p / (z @ npl)
            else:
                t2 = np.inf
            t = min(t1, t2)
            if not np.isfinite(t):
                return QPOutcome(QPStatus.INFEASIBLE, iterations=iterations)
            if np.isfinite(t2):
                alpha = alpha + t * z
            u = u - t * r
            u_p += t
            iterations += 1
            if t2 <= t1:
                active.append(p)
                u = np.append(u, u_p)
                break
            del active[k]
            u = np.delete(u, k)

    # incremental updates drift on ill-conditioned data; re-solve on the working set
    try:
        alpha_ws, u_ws = solve_saddle(L, -normals[:, active].T, model.c_hat,
                                      -bounds[active])
    except SingularSystem:
        pass
    else:
        # solve_saddle returns y with L a + E^T y = -c, i.e. y = u for E = -N^T
        if all(idx < me or val >= -tol for idx, val in zip(active, u_ws)):
            alpha, u = alpha_ws, u_ws

    lam = np.zeros(me)
    mu = np.zeros(mi)
    for idx, val in zip(active, u):
        if idx < me:
            lam[idx] = -val
        else:
            mu[idx - me] = max(val, 0.0)
    return _finish(model, alpha, lam, mu, iterations)


def min_total_violation(model):
    """
    Phase-1 LP: least ``sum |h + A a| + sum [g + B a]_+`` over all ``a``.

    Solved with HiGHS, independently of the active-set code.
    """
    d, me, mi = model.d, model.m_e, model.m_i
    nv = d + 2 * me + mi
    cost = np.concatenate([np.zeros(d), np.ones(2 * me + mi)])
    A_eq = np.hstack([model.A_hat, -np.eye(me), np.eye(me), np.zeros((me, mi))])
    A_ub = np.hstack([model.B_hat, np.zeros((mi, 2 * me)), -np.eye(mi)])
    bnds = [(None, None)] * d + [(0, None)] * (2 * me + mi)
    res = linprog(cost,
                  A_ub=A_ub if mi else None, b_ub=-model.g_t if mi else None,
                  A_eq=A_eq if me else None, b_eq=-model.h_t if me else None,
                  bounds=bnds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"phase-1 LP failed: {res.message}")
    return float(res.fun) if nv else 0.0


def _independent_rows(A, tol=1e-10):
    keep = []
    for i in range(A.shape[0]):
        trial = keep + [i]
        if np.linalg.matrix_rank(A[trial], tol=tol) == len(trial):
            keep = trial
    return keep


def brute_force_qp(model, tol=DEFAULT_TOL):
    """
    Reference solution by enumerating every inequality active set.

    Feasibility is decided first by :func:`min_total_violation`. Each active
    set that yields a full-rank equality system is solved exactly with
    :func:`solve_saddle`; candidates that are primal feasible with
    nonnegative multipliers are KKT points, and the cheapest one wins.
    """
    me, mi = model.m_e, model.m_i
    if mi > 12:
        raise TooManyConstraints(f"enumeration over 2^{mi} active sets refused")
    if min_total_violation(model) > tol:
        return QPOutcome(QPStatus.INFEASIBLE)
    eq_rows = _independent_rows(model.A_hat)
    best = None
    for size in range(mi + 1):
        for S in itertools.combinations(range(mi), size):
            S = list(S)
            E = np.vstack([model.A_hat[eq_rows], model.B_hat[S]])
            b = -np.concatenate([model.h_t[eq_rows], model.g_t[S]])
            try:
                a, y = solve_saddle(model.L, E, model.c_hat, b)
            except SingularSystem:
                continue
            if np.max(np.abs(model.h_t + model.A_hat @ a), initial=0.0) > tol:
                continue
            if np.max(model.g_t + model.B_hat @ a, initial=0.0) > tol:
                continue
            mu_S = y[len(eq_rows):]
            if np.any(mu_S < -tol):
                continue
            obj = model.objective(a)
            if best is None or obj < best[0] - 1e-14:
                lam = np.zeros(me)
                lam[eq_rows] = y[:len(eq_rows)]
                mu = np.zeros(mi)
                mu[S] = np.maximum(mu_S, 0.0)
                best = (obj, a, lam, mu)
    if best is None:
        return QPOutcome(QPStatus.DEGENERATE)
    _, a, lam, mu = best
    return _finish(model, a, lam, mu, 0)
