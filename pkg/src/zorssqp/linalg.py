"""Small dense kernels: thin QR and the proximal saddle-point solve."""

import numpy as np

__all__ = ["RankDeficient", "SingularSystem", "thin_qr", "solve_saddle"]

QR_PIVOT_TOL = 1e-12
SADDLE_SVAL_TOL = 1e-10


class RankDeficient(np.linalg.LinAlgError):
    """Raised when a matrix handed to :func:`thin_qr` lacks full column rank."""


class SingularSystem(np.linalg.LinAlgError):
    """Raised when the constraint block of a saddle-point system is rank deficient."""


def thin_qr(G, tol=QR_PIVOT_TOL):
    """
    Thin QR factorization with a nonnegative diagonal on ``R``.

    Parameters
    ----------
    G : array_like, shape (n, d)
        Matrix with ``n >= d``.
    tol : float, optional
        Smallest admissible ``|R[j, j]|`` (the column norm left after
        orthogonalizing against the previous columns).

    Returns
    -------
    Q : numpy.ndarray, shape (n, d)
        Orthonormal columns.
    R : numpy.ndarray, shape (d, d)
        Upper triangular, ``R[j, j] >= 0``.

    Raises
    ------
    RankDeficient
        If a pivot falls below `tol`.
    """
    G = np.asarray(G, dtype=float)
    if G.ndim != 2:
        raise ValueError("G must be two-dimensional")
    n, d = G.shape
    if n < d:
        raise ValueError(f"thin_qr needs n >= d, got {G.shape}")
    if d == 0:
        return np.zeros((n, 0)), np.zeros((0, 0))
    if not np.all(np.isfinite(G)):
        raise ValueError("G has non-finite entries")
    Q, R = np.linalg.qr(G, mode="reduced")
    # Householder signs are arbitrary; flip so diag(R) >= 0.
    signs = np.where(np.diag(R) < 0.0, -1.0, 1.0)
    Q = Q * signs
    R = R * signs[:, None]
    pivots = np.diag(R)
    if np.min(pivots) <= tol:
        j = int(np.argmin(pivots))
        raise RankDeficient(f"column {j} has residual norm {pivots[j]:.3e} <= {tol:.1e}")
    return Q, R


def solve_saddle(L, E, c, b, tol=SADDLE_SVAL_TOL):
    """
    Solve ``L a + E^T y = -c``, ``E a = b`` by the null-space method.

    This is the stationarity system of ``min <c, a> + (L/2)|a|^2 s.t. E a = b``.
    With ``E^T = Q R`` the feasible set is ``a = Q z + P w`` where ``R^T z = b``
    and ``P = I - Q Q^T``; the identity Hessian makes the tangential part
    ``-P c / L``.

    Parameters
    ----------
    L : float
        Positive proximal weight.
    E : array_like, shape (k, d)
        Constraint matrix with ``k <= d`` and full row rank.
    c : array_like, shape (d,)
    b : array_like, shape (k,)
    tol : float, optional
        Smallest admissible singular value of `E`.

    Returns
    -------
    a : numpy.ndarray, shape (d,)
    y : numpy.ndarray, shape (k,)

    Raises
    ------
    SingularSystem
        If the smallest singular value of `E` is at most `tol`.
    """
    if not L > 0:
        raise ValueError("L must be positive")
    c = np.asarray(c, dtype=float)
    d = c.shape[0]
    E = np.asarray(E, dtype=float).reshape(-1, d)
    b = np.asarray(b, dtype=float).reshape(-1)
    k = E.shape[0]
    if b.shape[0] != k:
        raise ValueError("E and b disagree on the number of rows")
    if k == 0:
        return -c / L, np.zeros(0)
    if k > d:
        raise SingularSystem(f"{k} constraints in dimension {d}")
    Q, R = np.linalg.qr(E.T, mode="reduced")
    smin = np.linalg.svd(R, compute_uv=False)[-1]
    if not smin > tol:
        raise SingularSystem(f"smallest singular value {smin:.3e} <= {tol:.1e}")
    z = np.linalg.solve(R.T, b)
    Qtc = Q.T @ c
    a = Q @ z - (c - Q @ Qtc) / L
    y = np.linalg.solve(R, -Qtc - L * z)
    return a, y
