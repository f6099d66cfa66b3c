"""Off-policy, data-driven policy iteration from input/state trajectories.

One trajectory of the (possibly disturbed) plant is reduced to three data
matrices on a uniform grid t_j = j*dt:

- ``delta_xx``: rows svec(x x^T) differenced across each interval,
- ``I_xx``: rows of the interval integrals of x (x) x,
- ``I_xu``: rows of the interval integrals of x (x) u.

Because the derivative of x^T P x along any input can be written against
exactly these quantities, the evaluate/improve pair of one iteration
collapses into a single least-squares solve; the dataset never depends on
the iterated gain, so one collection serves every iteration.

The interval integrals are accumulated as extra ODE coordinates inside the
same classical RK4 stepper that advances x, not by quadrature on samples:
the least-squares identity is exact only for exact integrals, and the
substep count is the single knob controlling that accuracy.
"""

import json
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import DimensionError, DivergenceError, StabilityError
from .lyapunov import is_hurwitz
from .matops import smat, svec, vec
from .riccati import LqrCost, LtiSystem

__all__ = [
    "SinusoidSignal",
    "TrajectoryData",
    "DataDrivenIterate",
    "simulate_collect",
    "required_rank",
    "rank_condition",
    "build_theta_xi",
    "pi_data_step",
    "pi_data_run",
    "save_trajectory_bundle",
    "load_trajectory_bundle",
]


@dataclass
class SinusoidSignal:
    """Sum-of-sinusoids exploration signal, one frequency set per channel.

    Evaluates to amplitude * sum_k sin(w[c, k] * t) on channel c.  Channels
    carry independent frequency draws: identical channels would make the
    x (x) u columns collinear and defeat the excitation rank requirement.
    """

    amplitude: float
    frequencies: np.ndarray  # shape (channels, count)
    seed: int | None = None
    freq_range: tuple[float, float] | None = None

    def __post_init__(self):
        self.frequencies = np.atleast_2d(np.asarray(self.frequencies, dtype=float))

    @classmethod
    def sample(
        cls,
        amplitude: float,
        channels: int,
        count: int,
        freq_range: tuple[float, float],
        seed: int,
    ) -> "SinusoidSignal":
        """Draw ``count`` frequencies per channel uniformly from freq_range."""
        rng = np.random.default_rng(seed)
        lo, hi = freq_range
        freqs = rng.uniform(lo, hi, size=(channels, count))
        return cls(amplitude=amplitude, frequencies=freqs, seed=seed,
                   freq_range=(float(lo), float(hi)))

    @classmethod
    def zero(cls, channels: int) -> "SinusoidSignal":
        return cls(amplitude=0.0, frequencies=np.zeros((channels, 1)))

    def __call__(self, t: float) -> np.ndarray:
        if self.amplitude == 0.0:
            return np.zeros(self.frequencies.shape[0])
        return self.amplitude * np.sin(self.frequencies * t).sum(axis=1)


@dataclass
class TrajectoryData:
    """Data matrices of one collected trajectory plus sampling metadata."""

    delta_xx: np.ndarray  # (M, n(n+1)/2)
    I_xx: np.ndarray      # (M, n^2)
    I_xu: np.ndarray      # (M, n m)
    M: int
    dt: float
    n: int
    m: int
    states: np.ndarray | None = None  # (M+1, n) grid states, when collected


def simulate_collect(
    sys: LtiSystem,
    u: SinusoidSignal,
    w: SinusoidSignal | None,
    x0: np.ndarray,
    M: int,
    dt: float,
    substeps: int = 20,
) -> TrajectoryData:
    """Integrate the plant and accumulate the data matrices on the grid.

    The ODE state is augmented with the running integrals of x (x) x and
    x (x) u, reset at each grid point, and everything is advanced together
    by classical RK4 at step dt/substeps.  ``w`` is an additive state-space
    disturbance (None for the nominal plant).

    Raises DivergenceError naming the failure time if the state leaves the
    finite floating-point range.
    """
    if dt <= 0.0 or M < 1 or substeps < 1:
        raise ValueError("need dt > 0, M >= 1, substeps >= 1")
    n, m = sys.n, sys.m
    if u.frequencies.shape[0] != m:
        raise DimensionError(f"input signal has {u.frequencies.shape[0]} channels, need {m}")
    if w is not None and w.frequencies.shape[0] != n:
        raise DimensionError(f"disturbance signal has {w.frequencies.shape[0]} channels, need {n}")
    x = np.asarray(x0, dtype=float).ravel()
    if x.size != n:
        raise DimensionError(f"x0 must have length {n}, got {x.size}")

    A, B = sys.A, sys.B
    nsv = n * (n + 1) // 2
    h = dt / substeps

    def rhs(t: float, z: np.ndarray) -> np.ndarray:
        xs = z[:n]
        ut = u(t)
        dx = A @ xs + B @ ut
        if w is not None:
            dx = dx + w(t)
        return np.concatenate([dx, np.kron(xs, xs), np.kron(xs, ut)])

    delta_xx = np.zeros((M, nsv))
    I_xx = np.zeros((M, n * n))
    I_xu = np.zeros((M, n * m))
    states = np.zeros((M + 1, n))
    states[0] = x

    for j in range(M):
        z = np.concatenate([x, np.zeros(n * n + n * m)])
        t = j * dt
        for s in range(substeps):
            ts = t + s * h
            k1 = rhs(ts, z)
            k2 = rhs(ts + 0.5 * h, z + 0.5 * h * k1)
            k3 = rhs(ts + 0.5 * h, z + 0.5 * h * k2)
            k4 = rhs(ts + h, z + h * k3)
            z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        x_next = z[:n]
        if not np.all(np.isfinite(x_next)):
            raise DivergenceError(f"state diverged on interval starting at t={t:.6g}")
        delta_xx[j] = svec(np.outer(x_next, x_next)) - svec(np.outer(x, x))
        I_xx[j] = z[n : n + n * n]
        I_xu[j] = z[n + n * n :]
        x = x_next
        states[j + 1] = x

    return TrajectoryData(
        delta_xx=delta_xx, I_xx=I_xx, I_xu=I_xu, M=M, dt=dt, n=n, m=m, states=states
    )


def required_rank(n: int, m: int) -> int:
    """Excitation target n(n+1)/2 + m n for the stacked data matrix."""
    return n * (n + 1) // 2 + m * n


def rank_condition(data: TrajectoryData, tol: float | None = None) -> bool:
    """True iff [I_xx, I_xu] has numerical rank n(n+1)/2 + m n.

    ``tol`` is relative to the largest singular value; the default is
    max(M, n0) * machine epsilon.  The stacked matrix can never exceed the
    target rank because x (x) x carries each symmetric product twice.
    """
    stacked = np.hstack([data.I_xx, data.I_xu])
    sigma = np.linalg.svd(stacked, compute_uv=False)
    n0 = required_rank(data.n, data.m)
    if sigma.size == 0 or sigma[0] == 0.0:
        return False
    if tol is None:
        tol = max(data.M, n0) * np.finfo(float).eps
    rank = int(np.sum(sigma > tol * sigma[0]))
    return rank == n0


def build_theta_xi(
    data: TrajectoryData, cost: LqrCost, K: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Assemble the least-squares pair (Theta, Xi) for the current gain.

    Theta = [delta_xx, -2 I_xx (I_n (x) K^T R) - 2 I_xu (I_n (x) R)]
    Xi    = -I_xx vec(Q + K^T R K)

    The unknown stacks [svec(P); vec(K_next)], so Theta has
    n(n+1)/2 + m n columns.
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    n, m = data.n, data.m
    if K.shape != (m, n):
        raise DimensionError(f"gain must be {m}x{n}, got {K.shape}")
    eye_n = np.eye(n)
    theta = np.hstack(
        [
            data.delta_xx,
            -2.0 * data.I_xx @ np.kron(eye_n, K.T @ cost.R)
            - 2.0 * data.I_xu @ np.kron(eye_n, cost.R),
        ]
    )
    xi = -data.I_xx @ vec(cost.Q + K.T @ cost.R @ K)
    return theta, xi


@dataclass
class DataDrivenIterate:
    """One least-squares iteration: estimated value matrix and next gain."""

    index: int
    P: np.ndarray
    K_next: np.ndarray
    lsq_residual: float
    rank_ok: bool
    theta_cond: float
    err_to_opt: float = float("nan")
    hurwitz: bool | None = None  # against the true plant, diagnostics only
    p_fro: float = 0.0


def pi_data_step(data: TrajectoryData, cost: LqrCost, K_hat: np.ndarray) -> DataDrivenIterate:
    """One minimum-norm least-squares update of (P, K) from fixed data.

    Solves Theta y = Xi by SVD (pseudoinverse semantics, minimum-norm in
    the rank-deficient case) and unpacks y into the symmetric value matrix
    and the column-stacked next gain.  A rank-deficient Theta flags
    ``rank_ok`` False on the result instead of raising.
    """
    n, m = data.n, data.m
    n0 = required_rank(n, m)
    theta, xi = build_theta_xi(data, cost, K_hat)
    y, _, rank, sigma = np.linalg.lstsq(theta, xi, rcond=None)
    nsv = n * (n + 1) // 2
    P = smat(y[:nsv])
    K_next = y[nsv:].reshape((n, m)).T
    residual = float(np.linalg.norm(theta @ y - xi))
    cond = float(sigma[0] / sigma[n0 - 1]) if rank >= n0 else float("inf")
    return DataDrivenIterate(
        index=0,
        P=P,
        K_next=K_next,
        lsq_residual=residual,
        rank_ok=bool(rank >= n0) and rank_condition(data),
        theta_cond=cond,
        p_fro=float(np.linalg.norm(P, "fro")),
    )


def pi_data_run(
    sys: LtiSystem,
    cost: LqrCost,
    K1_hat: np.ndarray,
    u: SinusoidSignal,
    w: SinusoidSignal | None,
    x0: np.ndarray,
    M: int,
    dt: float,
    substeps: int = 20,
    n_iter: int = 10,
    p_star: np.ndarray | None = None,
    data: TrajectoryData | None = None,
) -> list[DataDrivenIterate]:
    """Collect one dataset, then iterate the least-squares update on it.

    The dataset is collected once (or taken from ``data``) and reused by
    every iteration; the gain enters only through the reassembled
    least-squares pair.  Each produced gain is Hurwitz-checked against the
    true plant purely as a diagnostic, so a destabilizing iterate is
    recorded, not raised.
    """
    K = np.atleast_2d(np.asarray(K1_hat, dtype=float))
    if not is_hurwitz(sys.A - sys.B @ K):
        raise StabilityError("pi_data_run requires a stabilizing initial gain")
    if data is None:
        data = simulate_collect(sys, u, w, x0, M, dt, substeps)
    trace: list[DataDrivenIterate] = []
    for i in range(1, n_iter + 1):
        it = pi_data_step(data, cost, K)
        err = float("nan")
        if p_star is not None:
            err = float(np.linalg.norm(it.P - p_star, "fro"))
        it = replace(
            it,
            index=i,
            err_to_opt=err,
            hurwitz=is_hurwitz(sys.A - sys.B @ it.K_next),
        )
        trace.append(it)
        K = it.K_next
    return trace


def save_trajectory_bundle(data: TrajectoryData, prefix: str, meta: dict | None = None) -> None:
    """Write the three data matrices as CSV plus a JSON sidecar.

    Produces ``{prefix}_delta_xx.csv``, ``{prefix}_ixx.csv``,
    ``{prefix}_ixu.csv`` and ``{prefix}_meta.json`` holding M, dt, n, m and
    any extra metadata (signal seeds, etc.).
    """
    np.savetxt(f"{prefix}_delta_xx.csv", data.delta_xx, delimiter=",", fmt="%.17e")
    np.savetxt(f"{prefix}_ixx.csv", data.I_xx, delimiter=",", fmt="%.17e")
    np.savetxt(f"{prefix}_ixu.csv", data.I_xu, delimiter=",", fmt="%.17e")
    sidecar = {"M": data.M, "dt": data.dt, "n": data.n, "m": data.m}
    if meta:
        sidecar.update(meta)
    with open(f"{prefix}_meta.json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_trajectory_bundle(prefix: str) -> TrajectoryData:
    """Rebuild a :class:`TrajectoryData` from a saved bundle (states omitted)."""
    with open(f"{prefix}_meta.json") as fh:
        meta = json.load(fh)
    delta_xx = np.atleast_2d(np.loadtxt(f"{prefix}_delta_xx.csv", delimiter=","))
    I_xx = np.atleast_2d(np.loadtxt(f"{prefix}_ixx.csv", delimiter=","))
    I_xu = np.atleast_2d(np.loadtxt(f"{prefix}_ixu.csv", delimiter=","))
    return TrajectoryData(
        delta_xx=delta_xx,
        I_xx=I_xx,
        I_xu=I_xu,
        M=int(meta["M"]),
        dt=float(meta["dt"]),
        n=int(meta["n"]),
        m=int(meta["m"]),
    )
