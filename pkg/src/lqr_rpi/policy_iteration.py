"""Policy iteration for the continuous-time LQR problem.

Three layers live here:

- the exact iteration (evaluate a stabilizing gain through a Lyapunov
  solve, improve it from the assembled evaluation matrix),
- the disturbance-injected variant, where a symmetric perturbation is
  added to the evaluation matrix before each gain update, and
- empirical probes: a one-step contraction estimate around the fixed
  point and the closed-form stability margin that guarantees the next
  gain stays stabilizing while the perturbation is below it.

A disturbance large enough to destabilize an update is a reported outcome
of a run, not an exception: demonstrating the failure regime is part of
the point.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import SingularBlockError, StabilityError
from .lyapunov import is_hurwitz, lyap_solve
from .matops import smat, symmetrize
from .riccati import LqrCost, LtiSystem, check_pair, gain_from_value

__all__ = [
    "PiIterate",
    "DisturbanceSpec",
    "IssReport",
    "policy_evaluate",
    "policy_improve",
    "pi_exact_step",
    "pi_exact_run",
    "make_disturbance",
    "pi_robust_run",
    "stability_margin",
    "estimate_contraction",
]


@dataclass
class PiIterate:
    """One recorded iteration: value matrix, next gain, and diagnostics."""

    index: int
    P: np.ndarray
    K_next: np.ndarray
    G: np.ndarray
    delta_G_norm: float = 0.0
    err_to_opt: float = float("nan")
    hurwitz: bool = True          # A - B K_next Hurwitz?
    margin: float = float("nan")  # a_i for the (K_i, K_{i+1}) pair
    margin_ok: bool = True        # ||dG_i||_F < a_i held on this step
    schedule_ok: bool = True      # ||dG_i||_F < a_i / (1 + i^2) held
    p_fro: float = 0.0


def policy_evaluate(
    sys: LtiSystem, cost: LqrCost, K: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate a stabilizing gain: value matrix P and evaluation block G.

    P solves (A-BK)^T P + P (A-BK) = -(Q + K^T R K), so x0^T P x0 is the
    closed-loop cost from x0.  G stacks the pieces the gain update needs:

        G = [[Q + A^T P + P A,  P B],
             [B^T P,            R  ]]

    and satisfies quad_form_H(G, K) = 0 up to solver accuracy.
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    Ak = sys.A - sys.B @ K
    if not is_hurwitz(Ak):
        raise StabilityError("policy_evaluate requires a stabilizing gain")
    P = lyap_solve(Ak, cost.Q + K.T @ cost.R @ K)
    G = np.block(
        [
            [cost.Q + sys.A.T @ P + P @ sys.A, P @ sys.B],
            [sys.B.T @ P, cost.R],
        ]
    )
    return P, symmetrize(G)


def policy_improve(G: np.ndarray, n: int, cond_limit: float = 1e12) -> np.ndarray:
    """Gain update K = G22^{-1} G21 from an evaluation matrix of order n+m.

    ``n`` is the state dimension, fixing the block split.  Raises
    SingularBlockError when G22 is numerically singular (condition number
    above ``cond_limit``), which only happens outside the small-disturbance
    regime.
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    G22 = G[n:, n:]
    G21 = G[n:, :n]
    sigma = np.linalg.svd(G22, compute_uv=False)
    if sigma[-1] == 0.0 or sigma[0] / sigma[-1] > cond_limit:
        raise SingularBlockError("gain-update block is numerically singular")
    return np.linalg.solve(G22, G21)


def pi_exact_step(sys: LtiSystem, cost: LqrCost, P: np.ndarray) -> np.ndarray:
    """One exact step of the iteration map applied to a value matrix.

    Computes the gain K = R^{-1} B^T P and returns the evaluation of that
    gain.  The stabilizing Riccati solution is the fixed point.
    """
    K = gain_from_value(sys, cost, P)
    Ak = sys.A - sys.B @ K
    if not is_hurwitz(Ak):
        raise StabilityError("value matrix maps to a destabilizing gain")
    return lyap_solve(Ak, cost.Q + K.T @ cost.R @ K)


def stability_margin(K_i: np.ndarray, K_next: np.ndarray, n: int, m: int) -> float:
    """Perturbation budget a_i below which the next gain stays stabilizing.

    a_i = 1 / (m (sqrt(n) + ||K_i||_2)^2 + m (sqrt(n) + ||K_{i+1}||_2)^2)
    """
    ki = np.linalg.norm(np.atleast_2d(K_i), 2)
    kn = np.linalg.norm(np.atleast_2d(K_next), 2)
    rn = np.sqrt(n)
    return float(1.0 / (m * (rn + ki) ** 2 + m * (rn + kn) ** 2))


@dataclass
class DisturbanceSpec:
    """Recipe for the symmetric perturbations injected into evaluation.

    mode "none" produces zeros; "fixed_norm" produces matrices with
    Frobenius norm exactly ``norm_bound`` at every iteration; "decaying"
    shrinks the target geometrically, bound(i) = norm_bound * decay^(i-1).
    Realizations are deterministic in (seed, i).
    """

    mode: str = "none"
    norm_bound: float = 0.0
    decay: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("none", "fixed_norm", "decaying"):
            raise ValueError(f"unknown disturbance mode {self.mode!r}")
        if self.norm_bound < 0.0:
            raise ValueError("norm_bound must be nonnegative")
        if self.mode == "decaying" and not (0.0 < self.decay < 1.0):
            raise ValueError("decay must lie in (0, 1)")

    def bound(self, i: int) -> float:
        """Target Frobenius norm at iteration i (1-based)."""
        if self.mode == "none":
            return 0.0
        if self.mode == "fixed_norm":
            return self.norm_bound
        return self.norm_bound * self.decay ** (i - 1)


def make_disturbance(spec: DisturbanceSpec, i: int, order: int) -> np.ndarray:
    """Symmetric disturbance of order ``order`` for iteration i.

    A symmetrized Gaussian draw rescaled to the exact target norm; the
    stream is keyed on (seed, i) so sweeps are reproducible per iteration.
    """
    target = spec.bound(i)
    if target == 0.0:
        return np.zeros((order, order))
    rng = np.random.default_rng([spec.seed, i])
    w = rng.standard_normal((order, order))
    s = symmetrize(w)
    return s * (target / np.linalg.norm(s, "fro"))


@dataclass
class IssReport:
    """Summary diagnostics of a disturbance-injected run."""

    sigma_hat: float
    error_trace: np.ndarray
    ultimate_error: float
    margins_ok: bool
    schedule_ok: bool = True
    status: str = "completed"
    truncated_at: int | None = None


def _record(
    sys: LtiSystem,
    i: int,
    P: np.ndarray,
    K: np.ndarray,
    K_next: np.ndarray,
    G: np.ndarray,
    dg_norm: float,
    p_star: np.ndarray | None,
) -> PiIterate:
    a_i = stability_margin(K, K_next, sys.n, sys.m)
    err = float("nan")
    if p_star is not None:
        err = float(np.linalg.norm(P - p_star, "fro"))
    return PiIterate(
        index=i,
        P=P,
        K_next=K_next,
        G=G,
        delta_G_norm=dg_norm,
        err_to_opt=err,
        hurwitz=is_hurwitz(sys.A - sys.B @ K_next),
        margin=a_i,
        margin_ok=dg_norm < a_i,
        schedule_ok=dg_norm < a_i / (1.0 + i * i),
        p_fro=float(np.linalg.norm(P, "fro")),
    )


def pi_exact_run(
    sys: LtiSystem,
    cost: LqrCost,
    K1: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 50,
    p_star: np.ndarray | None = None,
) -> list[PiIterate]:
    """Run the exact iteration until successive value matrices settle.

    Stops when ||P_{i+1} - P_i||_F < tol * max(1, ||P||_F) (the scale
    guard keeps tight tolerances attainable for large value matrices) or
    after max_iter iterations, whichever comes first; the recorded trace
    is returned either way.
    """
    check_pair(sys, cost)
    K = np.atleast_2d(np.asarray(K1, dtype=float))
    trace: list[PiIterate] = []
    P_prev = None
    for i in range(1, max_iter + 1):
        P, G = policy_evaluate(sys, cost, K)
        K_next = policy_improve(G, sys.n)
        trace.append(_record(sys, i, P, K, K_next, G, 0.0, p_star))
        stop = tol * max(1.0, float(np.linalg.norm(P, "fro")))
        if P_prev is not None and np.linalg.norm(P - P_prev, "fro") < stop:
            break
        P_prev = P
        K = K_next
    return trace


def _summarize(trace: list[PiIterate], status: str, truncated_at: int | None) -> IssReport:
    errs = np.array([it.err_to_opt for it in trace], dtype=float)
    tail = errs[-5:] if errs.size else np.array([float("nan")])
    ultimate = float(np.max(tail)) if tail.size else float("nan")
    # Worst one-step error ratio over the transient, i.e. while the error
    # is still clearly above its ultimate level.
    sigma_hat = 0.0
    if errs.size >= 2 and np.all(np.isfinite(errs)):
        floor = max(2.0 * ultimate, 1e-14)
        for a, b in zip(errs[:-1], errs[1:]):
            if a > floor:
                sigma_hat = max(sigma_hat, b / a)
    margins_ok = all(it.hurwitz for it in trace if it.margin_ok)
    schedule_ok = all(it.schedule_ok for it in trace)
    return IssReport(
        sigma_hat=float(sigma_hat),
        error_trace=errs,
        ultimate_error=ultimate,
        margins_ok=margins_ok,
        schedule_ok=schedule_ok,
        status=status,
        truncated_at=truncated_at,
    )


def pi_robust_run(
    sys: LtiSystem,
    cost: LqrCost,
    K1_hat: np.ndarray,
    spec: DisturbanceSpec,
    n_iter: int = 30,
    p_star: np.ndarray | None = None,
) -> tuple[list[PiIterate], IssReport]:
    """Iterate with a disturbance added to each evaluation matrix.

    Each step evaluates the current gain exactly, perturbs the evaluation
    matrix by a draw from ``spec``, and updates the gain from the perturbed
    blocks.  A destabilizing or singular update truncates the run with a
    status instead of raising: large disturbances are allowed to fail.
    """
    check_pair(sys, cost)
    K = np.atleast_2d(np.asarray(K1_hat, dtype=float))
    if not is_hurwitz(sys.A - sys.B @ K):
        raise StabilityError("pi_robust_run requires a stabilizing initial gain")
    order = sys.n + sys.m
    trace: list[PiIterate] = []
    status = "completed"
    truncated_at = None
    for i in range(1, n_iter + 1):
        P, G = policy_evaluate(sys, cost, K)
        dG = make_disturbance(spec, i, order)
        G_hat = symmetrize(G + dG)
        try:
            K_next = policy_improve(G_hat, sys.n)
        except SingularBlockError:
            status = f"singular update block at iteration {i}"
            truncated_at = i
            break
        it = _record(sys, i, P, K, K_next, G_hat, float(np.linalg.norm(dG, "fro")), p_star)
        trace.append(it)
        if not it.hurwitz:
            status = f"stability lost at iteration {i}"
            truncated_at = i
            break
        K = K_next
    return trace, _summarize(trace, status, truncated_at)


def estimate_contraction(
    sys: LtiSystem,
    cost: LqrCost,
    p_star: np.ndarray,
    radius: float,
    n_samples: int = 64,
    seed: int = 0,
) -> float:
    """Worst one-step error ratio of the exact map on a sphere around P*.

    Samples value matrices uniformly on the Frobenius sphere of the given
    radius (unit Gaussian directions in svec coordinates), applies one
    exact step, and returns max ||P+ - P*||_F / radius.  Samples whose
    implied closed loop is not Hurwitz are excluded and reported through a
    warning; near the fixed point none should occur.
    """
    if radius == 0.0:
        return 0.0
    p_star = symmetrize(np.atleast_2d(p_star))
    nsv = sys.n * (sys.n + 1) // 2
    rng = np.random.default_rng(seed)
    worst = 0.0
    excluded = 0
    for _ in range(n_samples):
        v = rng.standard_normal(nsv)
        direction = smat(v / np.linalg.norm(v))
        P = p_star + radius * direction
        try:
            P_next = pi_exact_step(sys, cost, P)
        except StabilityError:
            excluded += 1
            continue
        worst = max(worst, float(np.linalg.norm(P_next - p_star, "fro")) / radius)
    if excluded:
        warnings.warn(
            f"estimate_contraction: {excluded}/{n_samples} samples mapped "
            "outside the stabilizing region and were excluded",
            stacklevel=2,
        )
    return worst
