"""Policy iteration for continuous-time LQR: exact, disturbed, data-driven.

The package splits into thin layers: ``matops`` (packing primitives),
``lyapunov`` (the operator X^T Y + Y X and its inverse), ``riccati``
(system/cost types and the certified equation solver), ``policy_iteration``
(exact and disturbance-injected runs plus margins), ``datadriven``
(trajectory collection and the off-policy least-squares iteration), and
``cli`` (JSON-config experiment front end).
"""

from .datadriven import (
    DataDrivenIterate,
    SinusoidSignal,
    TrajectoryData,
    build_theta_xi,
    load_trajectory_bundle,
    pi_data_run,
    pi_data_step,
    rank_condition,
    required_rank,
    save_trajectory_bundle,
    simulate_collect,
)
from .exceptions import (
    ConfigError,
    ConvergenceError,
    DimensionError,
    DivergenceError,
    LqrError,
    SingularBlockError,
    StabilityError,
)
from .lyapunov import (
    is_hurwitz,
    kron_lyap_matrix,
    lyap_apply,
    lyap_inverse_norm,
    lyap_solve,
)
from .matops import kron, quad_form_H, smat, svec, symmetrize, vec
from .plants import double_integrator, scalar_plant, stirred_tank
from .policy_iteration import (
    DisturbanceSpec,
    IssReport,
    PiIterate,
    estimate_contraction,
    make_disturbance,
    pi_exact_run,
    pi_exact_step,
    pi_robust_run,
    policy_evaluate,
    policy_improve,
    stability_margin,
)
from .riccati import (
    AreSolution,
    LqrCost,
    LtiSystem,
    are_residual,
    find_stabilizing_gain,
    solve_are,
)

__version__ = "0.1.0"

__all__ = [
    "AreSolution",
    "ConfigError",
    "ConvergenceError",
    "DataDrivenIterate",
    "DimensionError",
    "DisturbanceSpec",
    "DivergenceError",
    "IssReport",
    "LqrCost",
    "LqrError",
    "LtiSystem",
    "PiIterate",
    "SingularBlockError",
    "SinusoidSignal",
    "StabilityError",
    "TrajectoryData",
    "are_residual",
    "build_theta_xi",
    "double_integrator",
    "estimate_contraction",
    "find_stabilizing_gain",
    "is_hurwitz",
    "kron",
    "kron_lyap_matrix",
    "load_trajectory_bundle",
    "lyap_apply",
    "lyap_inverse_norm",
    "lyap_solve",
    "make_disturbance",
    "pi_data_run",
    "pi_data_step",
    "pi_exact_run",
    "pi_exact_step",
    "pi_robust_run",
    "policy_evaluate",
    "policy_improve",
    "quad_form_H",
    "rank_condition",
    "required_rank",
    "save_trajectory_bundle",
    "scalar_plant",
    "simulate_collect",
    "smat",
    "solve_are",
    "stability_margin",
    "stirred_tank",
    "svec",
    "symmetrize",
    "vec",
]
