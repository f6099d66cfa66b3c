"""Lyapunov operator L_X(Y) = X^T Y + Y X and its Kronecker linearization.

The operator is inverted by solving the n^2-by-n^2 linear system
P(X) vec(Y) = vec(-Z) with P(X) = I (x) X^T + X^T (x) I, which is dense LU
territory for the problem sizes this package targets (n <= ~20).
"""

import numpy as np

from .exceptions import DimensionError, StabilityError
from .matops import symmetrize, vec

__all__ = [
    "is_hurwitz",
    "lyap_apply",
    "kron_lyap_matrix",
    "lyap_solve",
    "lyap_inverse_norm",
]

#: Eigenvalues must sit strictly left of -HURWITZ_TOL to count as stable.
HURWITZ_TOL = 1e-9


def is_hurwitz(x: np.ndarray, tol: float = HURWITZ_TOL) -> bool:
    """True iff every eigenvalue of x has real part below -tol."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return bool(np.max(np.linalg.eigvals(x).real) < -tol)


def lyap_apply(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Apply the operator: X^T Y + Y X."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if x.shape != y.shape or x.shape[0] != x.shape[1]:
        raise DimensionError(
            f"lyap_apply needs square matrices of equal order, got {x.shape} and {y.shape}"
        )
    return x.T @ y + y @ x


def kron_lyap_matrix(x: np.ndarray) -> np.ndarray:
    """Matrix form P(X) = I (x) X^T + X^T (x) I acting on vec(Y)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[0]
    eye = np.eye(n)
    return np.kron(eye, x.T) + np.kron(x.T, eye)


def lyap_solve(x: np.ndarray, z: np.ndarray, hurwitz_tol: float = HURWITZ_TOL) -> np.ndarray:
    """Solve X^T Y + Y X = -Z for the unique symmetric Y.

    Parameters
    ----------
    x : (n, n) array
        Must be Hurwitz; checked up front because the linearized system is
        singular exactly when two eigenvalues of x sum to zero.
    z : (n, n) array
        Right-hand side; symmetrized before solving.
    hurwitz_tol : float
        Margin used by the stability check.

    Returns
    -------
    (n, n) symmetric array equal to the integral of e^{X^T t} Z e^{X t}
    over [0, inf).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    z = symmetrize(np.atleast_2d(z))
    if x.shape != z.shape:
        raise DimensionError(f"lyap_solve shapes differ: {x.shape} vs {z.shape}")
    if not is_hurwitz(x, tol=hurwitz_tol):
        raise StabilityError("lyap_solve requires a Hurwitz coefficient matrix")
    p = kron_lyap_matrix(x)
    y = np.linalg.solve(p, vec(-z))
    return symmetrize(y.reshape(x.shape, order="F"))


def lyap_inverse_norm(x: np.ndarray, hurwitz_tol: float = HURWITZ_TOL) -> float:
    """Spectral norm of P(X)^{-1}.

    Equals the operator norm of the inverse Lyapunov operator when matrices
    are measured in the Frobenius norm.  Computed as 1/sigma_min(P(X)).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if not is_hurwitz(x, tol=hurwitz_tol):
        raise StabilityError("lyap_inverse_norm requires a Hurwitz matrix")
    sigma = np.linalg.svd(kron_lyap_matrix(x), compute_uv=False)
    return float(1.0 / sigma[-1])
