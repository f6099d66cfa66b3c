"""Continuous-time algebraic Riccati equation: residual, solver, gains.

The ground-truth solver is the exact gain-update iteration run to a tight
tolerance and certified by its residual, rather than an imported Riccati
routine; uniqueness of the stabilizing solution makes the result
independent of the initial gain.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConvergenceError, DimensionError, StabilityError
from .lyapunov import HURWITZ_TOL, is_hurwitz, lyap_solve
from .matops import symmetrize

__all__ = [
    "LtiSystem",
    "LqrCost",
    "AreSolution",
    "are_residual",
    "solve_are",
    "find_stabilizing_gain",
]


@dataclass
class LtiSystem:
    """Plant matrices of dx/dt = A x + B u; (A, B) must be controllable."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.B = np.atleast_2d(np.asarray(self.B, dtype=float))
        if self.A.shape[0] != self.A.shape[1]:
            raise ValueError(f"A must be square, got {self.A.shape}")
        if self.B.shape[0] != self.A.shape[0]:
            raise ValueError(
                f"B must have {self.A.shape[0]} rows, got {self.B.shape}"
            )
        ctrb = np.hstack(
            [np.linalg.matrix_power(self.A, k) @ self.B for k in range(self.n)]
        )
        if np.linalg.matrix_rank(ctrb) < self.n:
            raise ValueError("(A, B) is not controllable (numerical rank test)")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]


@dataclass
class LqrCost:
    """Quadratic weights of the running cost x^T Q x + u^T R u.

    Q must be positive semidefinite and R positive definite; both are
    symmetrized on construction.  Observability of (A, Q^{1/2}) is checked
    when the cost is paired with a system (see :func:`check_pair`).
    """

    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        self.Q = symmetrize(np.atleast_2d(np.asarray(self.Q, dtype=float)))
        self.R = symmetrize(np.atleast_2d(np.asarray(self.R, dtype=float)))
        if np.min(np.linalg.eigvalsh(self.Q)) < -1e-10:
            raise ValueError("Q must be positive semidefinite")
        if np.min(np.linalg.eigvalsh(self.R)) <= 0.0:
            raise ValueError("R must be positive definite")

    def q_sqrt(self) -> np.ndarray:
        """Symmetric PSD square root of Q."""
        w, v = np.linalg.eigh(self.Q)
        return v @ np.diag(np.sqrt(np.clip(w, 0.0, None))) @ v.T


def check_pair(sys: LtiSystem, cost: LqrCost) -> None:
    """Validate dimensions and observability of (A, Q^{1/2}).

    Raises ValueError when the cost does not fit the system or the pair is
    unobservable, which would break uniqueness of the stabilizing solution.
    """
    if cost.Q.shape != (sys.n, sys.n) or cost.R.shape != (sys.m, sys.m):
        raise DimensionError(
            f"cost shapes {cost.Q.shape}/{cost.R.shape} do not match system "
            f"(n={sys.n}, m={sys.m})"
        )
    c = cost.q_sqrt()
    obs = np.vstack([c @ np.linalg.matrix_power(sys.A, k) for k in range(sys.n)])
    if np.linalg.matrix_rank(obs) < sys.n:
        raise ValueError("(A, Q^{1/2}) is not observable (numerical rank test)")


@dataclass
class AreSolution:
    """Stabilizing Riccati solution with its certified residual."""

    P_star: np.ndarray
    K_star: np.ndarray
    residual_norm: float
    iterations: int = field(default=0)


def are_residual(sys: LtiSystem, cost: LqrCost, P: np.ndarray) -> np.ndarray:
    """Residual A^T P + P A - P B R^{-1} B^T P + Q."""
    P = symmetrize(np.atleast_2d(P))
    if P.shape != (sys.n, sys.n):
        raise DimensionError(f"P must have order {sys.n}, got {P.shape}")
    rinv_btp = np.linalg.solve(cost.R, sys.B.T @ P)
    return symmetrize(sys.A.T @ P + P @ sys.A - P @ sys.B @ rinv_btp + cost.Q)


def gain_from_value(sys: LtiSystem, cost: LqrCost, P: np.ndarray) -> np.ndarray:
    """Gain update K = R^{-1} B^T P."""
    return np.linalg.solve(cost.R, sys.B.T @ np.atleast_2d(P))


def solve_are(
    sys: LtiSystem,
    cost: LqrCost,
    K1: np.ndarray | None = None,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> AreSolution:
    """Solve the ARE by iterating evaluate/improve from a stabilizing gain.

    Parameters
    ----------
    K1 : (m, n) array or None
        Initial stabilizing gain.  None means bootstrap one with
        :func:`find_stabilizing_gain`.
    tol : float
        Stop when successive value matrices differ by less than
        tol * max(1, ||P||_F); the scale guard keeps the default
        attainable when ||P|| is large, where an absolute 1e-12 sits
        below the floating-point plateau.  Convergence is quadratic, so
        max_iter is generous.

    Returns
    -------
    AreSolution with the positive definite value matrix, the optimal gain,
    and the Frobenius norm of the equation residual.
    """
    check_pair(sys, cost)
    if K1 is None:
        K1 = find_stabilizing_gain(sys)
    K = np.atleast_2d(np.asarray(K1, dtype=float))
    if K.shape != (sys.m, sys.n):
        raise DimensionError(f"K1 must be {sys.m}x{sys.n}, got {K.shape}")
    if not is_hurwitz(sys.A - sys.B @ K):
        raise StabilityError("solve_are requires a stabilizing initial gain")

    P_prev = None
    for it in range(1, max_iter + 1):
        Ak = sys.A - sys.B @ K
        if not is_hurwitz(Ak):
            raise StabilityError(f"iteration {it} produced a destabilizing gain")
        P = lyap_solve(Ak, cost.Q + K.T @ cost.R @ K)
        K = gain_from_value(sys, cost, P)
        stop = tol * max(1.0, float(np.linalg.norm(P, "fro")))
        if P_prev is not None and np.linalg.norm(P - P_prev, "fro") < stop:
            res = float(np.linalg.norm(are_residual(sys, cost, P), "fro"))
            return AreSolution(P_star=P, K_star=K, residual_norm=res, iterations=it)
        P_prev = P
    raise ConvergenceError(f"no convergence within {max_iter} iterations (tol={tol})")


def find_stabilizing_gain(
    sys: LtiSystem,
    hurwitz_tol: float = HURWITZ_TOL,
    horizon: float = 200.0,
    check_interval: float = 0.5,
) -> np.ndarray:
    """Bootstrap a stabilizing gain without an external Riccati solver.

    Already-stable plants take the fast path K = 0.  Otherwise the
    finite-horizon value flow dP/dt = A^T P + P A - P B B^T P + I is
    integrated from P = 0 with fixed-step RK4 until B^T P stabilizes the
    plant; the flow is monotone, so no overshoot handling is needed.
    """
    if is_hurwitz(sys.A, tol=hurwitz_tol):
        return np.zeros((sys.m, sys.n))

    A, B = sys.A, sys.B
    BBt = B @ B.T
    eye = np.eye(sys.n)
    # RK4 stays well inside its stability region with this step; the flow's
    # stiffness is set by A since the quadratic term only damps.
    h = 0.1 / (1.0 + np.linalg.norm(A, 2) + np.linalg.norm(BBt, 2))
    steps_per_check = max(1, int(round(check_interval / h)))

    def flow(P):
        return A.T @ P + P @ A - P @ BBt @ P + eye

    P = np.zeros((sys.n, sys.n))
    t = 0.0
    while t < horizon:
        for _ in range(steps_per_check):
            k1 = flow(P)
            k2 = flow(P + 0.5 * h * k1)
            k3 = flow(P + 0.5 * h * k2)
            k4 = flow(P + h * k3)
            P = symmetrize(P + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        t += steps_per_check * h
        K = B.T @ P
        if is_hurwitz(A - B @ K, tol=hurwitz_tol):
            return K
    raise ConvergenceError(
        f"value flow reached horizon {horizon} without stabilizing the plant"
    )
