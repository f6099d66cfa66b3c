"""Vectorization and quadratic-form primitives shared by every solver.

Conventions used throughout the package:

- ``vec`` stacks columns top to bottom (Fortran order).
- ``svec`` walks the upper triangle row by row and scales off-diagonal
  entries by sqrt(2), so the Euclidean inner product of two svec images
  equals the trace inner product of the matrices.
"""

import numpy as np

from .exceptions import DimensionError

__all__ = ["symmetrize", "svec", "smat", "vec", "kron", "quad_form_H"]


def symmetrize(x: np.ndarray) -> np.ndarray:
    """Return (X + X^T)/2."""
    x = np.asarray(x, dtype=float)
    return 0.5 * (x + x.T)


def _triu_scale(k: int):
    rows, cols = np.triu_indices(k)
    scale = np.where(rows == cols, 1.0, np.sqrt(2.0))
    return rows, cols, scale


def svec(y: np.ndarray) -> np.ndarray:
    """Half-vectorize a symmetric matrix of order k into length k(k+1)/2.

    The input is symmetrized first, so 0.5*(Y + Y^T) is what gets packed.
    Ordering is row-major over the upper triangle:
    [y11, sqrt(2) y12, ..., sqrt(2) y1k, y22, sqrt(2) y23, ..., ykk].
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 2 or y.shape[0] != y.shape[1]:
        raise DimensionError(f"svec expects a square matrix, got shape {y.shape}")
    y = symmetrize(y)
    rows, cols, scale = _triu_scale(y.shape[0])
    return y[rows, cols] * scale


def smat(v: np.ndarray) -> np.ndarray:
    """Invert :func:`svec`: rebuild the symmetric matrix from its packing."""
    v = np.asarray(v, dtype=float).ravel()
    k = int(round((np.sqrt(8.0 * v.size + 1.0) - 1.0) / 2.0))
    if k * (k + 1) // 2 != v.size:
        raise DimensionError(
            f"svec packing must have length k(k+1)/2, got {v.size}"
        )
    rows, cols, scale = _triu_scale(k)
    y = np.zeros((k, k))
    y[rows, cols] = v / scale
    return y + np.triu(y, 1).T


def vec(x: np.ndarray) -> np.ndarray:
    """Stack the columns of X into a single vector."""
    return np.asarray(x, dtype=float).flatten(order="F")


def kron(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Kronecker product (thin wrapper over numpy for a uniform namespace)."""
    return np.kron(np.asarray(x, dtype=float), np.asarray(y, dtype=float))


def quad_form_H(u: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Two-sided quadratic form [I, -Z^T] U [I; -Z], symmetrized.

    ``u`` must be symmetric of order n+m and ``z`` an m-by-n gain; the
    result has order n.  Used to test stationarity of policy-evaluation
    matrices against a gain.
    """
    u = np.asarray(u, dtype=float)
    z = np.atleast_2d(np.asarray(z, dtype=float))
    m, n = z.shape
    if u.shape != (n + m, n + m):
        raise DimensionError(
            f"quad_form_H: U must have order n+m={n + m}, got shape {u.shape}"
        )
    w = np.vstack([np.eye(n), -z])
    return symmetrize(w.T @ u @ w)
