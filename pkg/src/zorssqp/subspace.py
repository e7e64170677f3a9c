"""Haar-uniform orthonormal bases of random d-dimensional subspaces."""

import numpy as np

from .linalg import RankDeficient, thin_qr

__all__ = ["make_rng", "sample_subspace"]

MAX_QR_RETRIES = 5


def make_rng(seed):
    """Counter-based Philox stream seeded with a 64-bit integer."""
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def sample_subspace(n, d, rng):
    """
    Draw ``U`` Haar-uniformly from the Stiefel manifold ``St(n, d)``.

    ``G`` has i.i.d. standard normal entries and ``U`` is the ``Q`` factor of
    its thin QR factorization with nonnegative ``diag(R)``; that sign choice
    is what makes ``U`` exactly Haar distributed. Each attempt consumes one
    ``(n, d)`` block of normals from `rng`.

    Parameters
    ----------
    n, d : int
        Ambient and subspace dimension, ``1 <= d <= n``.
    rng : numpy.random.Generator

    Returns
    -------
    numpy.ndarray, shape (n, d)
    """
    if not 1 <= d <= n:
        raise ValueError(f"need 1 <= d <= n, got n={n}, d={d}")
    for _ in range(MAX_QR_RETRIES):
        G = rng.standard_normal((n, d))
        try:
            U, _ = thin_qr(G)
        except RankDeficient:
            continue
        return U
    raise RankDeficient(f"{MAX_QR_RETRIES} consecutive rank-deficient Gaussian draws")
