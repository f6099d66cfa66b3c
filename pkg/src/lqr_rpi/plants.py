"""Benchmark plants used by the tests, demos, and default experiment."""

import numpy as np

from .riccati import LqrCost, LtiSystem

__all__ = ["stirred_tank", "double_integrator", "scalar_plant"]

STIRRED_TANK_A = np.array([[-21.0, -20.0], [9.0, 8.0]])


def stirred_tank() -> tuple[LtiSystem, LqrCost]:
    """Two-state constant-level stirred tank reactor with identity weights.

    The drift is Hurwitz (eigenvalues -1 and -12) and the input acts on
    both states directly, so the zero gain is already admissible.
    """
    sys = LtiSystem(A=STIRRED_TANK_A, B=np.eye(2))
    cost = LqrCost(Q=np.eye(2), R=np.eye(2))
    return sys, cost


def double_integrator() -> LtiSystem:
    """Force-driven point mass: two states, one input, not open-loop stable."""
    return LtiSystem(A=np.array([[0.0, 1.0], [0.0, 0.0]]), B=np.array([[0.0], [1.0]]))


def scalar_plant(a: float = -1.0, b: float = 1.0) -> tuple[LtiSystem, LqrCost]:
    """One-dimensional plant with unit weights; closed forms are easy by hand."""
    sys = LtiSystem(A=[[a]], B=[[b]])
    cost = LqrCost(Q=[[1.0]], R=[[1.0]])
    return sys, cost
