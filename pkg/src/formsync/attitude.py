"""Rigid-spacecraft attitude plant in Euler and MRP-Lagrangian form."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .core_math import (
    MRP_GUARD,
    check_mrp,
    cross3,
    mrp_kinematics,
    mrp_kinematics_inv,
    mrp_kinematics_rate,
    skew,
)

INERTIA_SYMMETRY_TOL = 1e-12

# order of the inertia parameters used by the adaptive regressor
INERTIA_PARAM_NAMES = ("J11", "J22", "J33", "J12", "J13", "J23")


@dataclass(frozen=True)
class SpacecraftBody:
    """Rigid body with optional wheel momentum and body-torque saturation."""

    inertia: np.ndarray
    wheel_momentum: np.ndarray = field(default_factory=lambda: np.zeros(3))
    torque_limit: float | None = None

    def __post_init__(self):
        J = np.asarray(self.inertia, dtype=float)
        if J.shape != (3, 3):
            raise ValueError(f"inertia must be 3x3, got {J.shape}")
        if not np.allclose(J, J.T, rtol=0.0, atol=INERTIA_SYMMETRY_TOL * max(1.0, np.abs(J).max())):
            raise ValueError("inertia is not symmetric")
        if np.linalg.eigvalsh(J)[0] <= 0.0:
            raise ValueError("inertia is not positive definite")
        h = np.asarray(self.wheel_momentum, dtype=float).reshape(3)
        if self.torque_limit is not None and not self.torque_limit > 0.0:
            raise ValueError("torque_limit must be positive")
        object.__setattr__(self, "inertia", J)
        object.__setattr__(self, "wheel_momentum", h)

    @cached_property
    def inertia_inv(self) -> np.ndarray:
        return np.linalg.inv(self.inertia)


@dataclass(frozen=True)
class AttitudeState:
    q: np.ndarray
    q_dot: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).reshape(3)
        q_dot = np.asarray(self.q_dot, dtype=float).reshape(3)
        if not np.all(np.isfinite(q_dot)):
            raise ValueError("q_dot has non-finite components")
        object.__setattr__(self, "q", check_mrp(q))
        object.__setattr__(self, "q_dot", q_dot)

    @classmethod
    def from_body_rates(cls, q, omega) -> "AttitudeState":
        return cls(q, mrp_kinematics(q) @ np.asarray(omega, dtype=float))


def body_rates(state: AttitudeState) -> np.ndarray:
    """omega = Z(q)^-1 q_dot."""
    return mrp_kinematics_inv(state.q) @ state.q_dot


def euler_rhs(body: SpacecraftBody, omega, u, d_ext) -> np.ndarray:
    """Angular acceleration from J w_dot - (J w + h) x w = u + d_ext."""
    omega = np.asarray(omega, dtype=float)
    H = body.inertia @ omega + body.wheel_momentum
    return body.inertia_inv @ (cross3(H, omega) + np.asarray(u, float) + np.asarray(d_ext, float))


def lagrangian_matrices(body: SpacecraftBody, state: AttitudeState):
    """Return ``(M, C)`` of ``M(q) q_ddot + C(q, q_dot) q_dot = tau``."""
    Zi = mrp_kinematics_inv(state.q)
    Zd = mrp_kinematics_rate(state.q, state.q_dot)
    omega = Zi @ state.q_dot
    JZi = body.inertia @ Zi
    M = Zi.T @ JZi
    M = 0.5 * (M + M.T)
    C = -Zi.T @ JZi @ Zd @ Zi - Zi.T @ skew(body.inertia @ omega + body.wheel_momentum) @ Zi
    return M, C


def generalized_torque(state: AttitudeState, u_body) -> np.ndarray:
    """tau = Z^-T u."""
    return mrp_kinematics_inv(state.q).T @ np.asarray(u_body, dtype=float)


def body_torque(state: AttitudeState, tau, torque_limit: float | None = None) -> np.ndarray:
    """u = Z^T tau, clamped element-wise to ``+-torque_limit`` when given."""
    u = mrp_kinematics(state.q).T @ np.asarray(tau, dtype=float)
    if torque_limit is not None:
        u = np.clip(u, -torque_limit, torque_limit)
    return u


def lagrangian_rhs(body: SpacecraftBody, state: AttitudeState, tau) -> np.ndarray:
    """q_ddot from the Lagrangian form; used to cross-check the Euler form."""
    M, C = lagrangian_matrices(body, state)
    return np.linalg.solve(M, np.asarray(tau, dtype=float) - C @ state.q_dot)


def mrp_acceleration(body: SpacecraftBody, q, omega, omega_dot) -> np.ndarray:
    """q_ddot = Z_dot omega + Z omega_dot."""
    Z = mrp_kinematics(q)
    q_dot = Z @ omega
    return mrp_kinematics_rate(q, q_dot) @ omega + Z @ omega_dot


def kinetic_energy(body: SpacecraftBody, omega) -> float:
    omega = np.asarray(omega, dtype=float)
    return 0.5 * float(omega @ body.inertia @ omega)


def angular_momentum(body: SpacecraftBody, omega) -> np.ndarray:
    return body.inertia @ np.asarray(omega, dtype=float) + body.wheel_momentum


# ---------------------------------------------------------------------------
# linear parameterization in the inertia entries

def inertia_params(J) -> np.ndarray:
    J = np.asarray(J, dtype=float)
    return np.array([J[0, 0], J[1, 1], J[2, 2], J[0, 1], J[0, 2], J[1, 2]])


def params_to_inertia(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return np.array([[a[0], a[3], a[4]], [a[3], a[1], a[5]], [a[4], a[5], a[2]]])


def _inertia_action(v) -> np.ndarray:
    """E(v) with ``J @ v == E(v) @ inertia_params(J)``."""
    v1, v2, v3 = v
    return np.array(
        [
            [v1, 0.0, 0.0, v2, v3, 0.0],
            [0.0, v2, 0.0, v1, 0.0, v3],
            [0.0, 0.0, v3, 0.0, v1, v2],
        ]
    )


def inertia_regressor(q, q_dot, qr_dot, qr_ddot):
    """Regressor ``Y`` (3x6) and wheel term ``w`` such that

    ``M q_ddot_r + C q_dot_r == Y @ inertia_params(J) + w``.

    ``w`` does not depend on J; it is returned for a unit wheel momentum
    basis and must be contracted with ``h`` via :func:`wheel_term`.
    """
    Zi = mrp_kinematics_inv(q)
    Zd = mrp_kinematics_rate(q, q_dot)
    omega = Zi @ q_dot
    b = Zi @ qr_dot
    a = Zi @ qr_ddot - Zi @ (Zd @ b)
    # J a - S(J w) b = J a + S(b) J w
    return Zi.T @ (_inertia_action(a) + skew(b) @ _inertia_action(omega))


def wheel_term(q, qr_dot, h) -> np.ndarray:
    """Contribution ``-Z^-T S(h) Z^-1 q_dot_r`` of the wheel momentum to C q_dot_r."""
    Zi = mrp_kinematics_inv(q)
    return -Zi.T @ cross3(h, Zi @ qr_dot)


__all__ = [
    "MRP_GUARD",
    "SpacecraftBody",
    "AttitudeState",
    "body_rates",
    "euler_rhs",
    "lagrangian_matrices",
    "generalized_torque",
    "body_torque",
    "lagrangian_rhs",
    "mrp_acceleration",
    "kinetic_energy",
    "angular_momentum",
    "inertia_params",
    "params_to_inertia",
    "inertia_regressor",
    "wheel_term",
]
