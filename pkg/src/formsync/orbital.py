"""Relative translational dynamics in the formation orbital frame.

The frame origin sits at the formation centre of mass on a circular orbit
of radius ``R0``: ``y`` along the radius vector, ``z`` along the orbit
normal and ``x = y cross z``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonPositiveRadiusError

EARTH_MU = 398600.4418e9  # m^3/s^2
EARTH_RADIUS = 6378.137e3  # m, equatorial
EARTH_J2 = 1.08263e-3


def orbital_rate(R0: float, mu: float = EARTH_MU) -> float:
    if not R0 > 0.0:
        raise NonPositiveRadiusError(f"orbit radius must be positive, got {R0}")
    return math.sqrt(mu / R0**3)


@dataclass(frozen=True)
class ReferenceOrbit:
    R0: float
    mu: float = EARTH_MU
    omega0: float = field(init=False)

    def __post_init__(self):
        if not self.R0 > EARTH_RADIUS:
            raise NonPositiveRadiusError(
                f"reference radius {self.R0} m is inside the Earth"
            )
        object.__setattr__(self, "omega0", orbital_rate(self.R0, self.mu))

    @classmethod
    def from_altitude(cls, altitude: float, mu: float = EARTH_MU) -> "ReferenceOrbit":
        return cls(EARTH_RADIUS + altitude, mu)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega0


@dataclass(frozen=True)
class TransState:
    r: np.ndarray
    r_dot: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float).reshape(3)
        r_dot = np.asarray(self.r_dot, dtype=float).reshape(3)
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(r_dot))):
            raise ValueError("translational state has non-finite components")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "r_dot", r_dot)


def _radius(orbit: ReferenceOrbit, r) -> float:
    R = math.sqrt(r[0] ** 2 + (r[1] + orbit.R0) ** 2 + r[2] ** 2)
    if not R > 0.0:
        raise ValueError("satellite at the Earth's centre")
    return R


def relative_rhs(orbit: ReferenceOrbit, r, r_dot, F, F_d, m: float) -> np.ndarray:
    """Relative acceleration ``(x_ddot, y_ddot, z_ddot)``."""
    if not m > 0.0:
        raise ValueError("mass must be positive")
    x, y, z = (float(v) for v in r)
    xd, yd, _ = (float(v) for v in r_dot)
    w0, mu, R0 = orbit.omega0, orbit.mu, orbit.R0
    R3 = _radius(orbit, r) ** 3
    f = (np.asarray(F, dtype=float) + np.asarray(F_d, dtype=float)) / m
    return np.array(
        [
            2.0 * w0 * yd + w0**2 * x - mu * x / R3 + f[0],
            -2.0 * w0 * xd + w0**2 * y - mu * (R0 + y) / R3 + mu / R0**2 + f[1],
            -mu * z / R3 + f[2],
        ]
    )


def lagrangian_form(orbit: ReferenceOrbit, m: float, r, constant_d: bool = False):
    """``(M, C, D(r), g(r))`` of ``M r_ddot + C r_dot + D(r) r + g(r) = F``.

    The z-entry of D carries the mass like the other two diagonal entries.
    With ``constant_d`` the far-field approximation ``m diag(0, 0, w0^2)``
    replaces D(r); g is left exact.
    """
    if not m > 0.0:
        raise ValueError("mass must be positive")
    w0, mu, R0 = orbit.omega0, orbit.mu, orbit.R0
    M = m * np.eye(3)
    C = np.array([[0.0, -2.0 * m * w0, 0.0], [2.0 * m * w0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    R3 = _radius(orbit, r) ** 3
    if constant_d:
        D = m * np.diag([0.0, 0.0, w0**2])
    else:
        d = -m * w0**2 + m * mu / R3
        D = np.diag([d, d, m * mu / R3])
    g = np.array([0.0, m * (mu * R0 / R3 - mu / R0**2), 0.0])
    return M, C, D, g


def linearized_rhs(orbit: ReferenceOrbit, r, r_dot) -> np.ndarray:
    """Unforced relative motion linearized about the frame origin."""
    w0 = orbit.omega0
    return np.array(
        [
            2.0 * w0 * r_dot[1],
            -2.0 * w0 * r_dot[0] + 3.0 * w0**2 * r[1],
            -(w0**2) * r[2],
        ]
    )


def linearized_jacobi_integral(orbit: ReferenceOrbit, r, r_dot) -> float:
    w0 = orbit.omega0
    return 0.5 * float(np.dot(r_dot, r_dot)) - 1.5 * w0**2 * r[1] ** 2 + 0.5 * w0**2 * r[2] ** 2


# ---------------------------------------------------------------------------
# J2

def frame_basis(orbit_phase: float, inclination: float) -> np.ndarray:
    """Rows are the orbital-frame axes ``x, y, z`` expressed in ECI (RAAN = 0)."""
    cu, su = math.cos(orbit_phase), math.sin(orbit_phase)
    ci, si = math.cos(inclination), math.sin(inclination)
    e_r = np.array([cu, su * ci, su * si])
    e_n = np.array([0.0, -si, ci])
    e_x = np.cross(e_r, e_n)
    return np.vstack([e_x, e_r, e_n])


def j2_acceleration(pos, mu: float = EARTH_MU, j2: float = EARTH_J2, re: float = EARTH_RADIUS) -> np.ndarray:
    """J2 part of the gravitational acceleration at an ECI position."""
    x, y, z = (float(v) for v in pos)
    r2 = x * x + y * y + z * z
    r = math.sqrt(r2)
    k = -1.5 * j2 * mu * re * re / (r2 * r2 * r)
    zz = 5.0 * z * z / r2
    return k * np.array([x * (1.0 - zz), y * (1.0 - zz), z * (3.0 - zz)])


def j2_potential(pos, mu: float = EARTH_MU, j2: float = EARTH_J2, re: float = EARTH_RADIUS) -> float:
    """J2 term of the gravitational potential (acceleration = +grad)."""
    x, y, z = (float(v) for v in pos)
    r2 = x * x + y * y + z * z
    r = math.sqrt(r2)
    return -0.5 * j2 * mu * re * re / (r2 * r) * (3.0 * z * z / r2 - 1.0)


def j2_disturbance(orbit: ReferenceOrbit, r, orbit_phase: float, inclination: float, m: float) -> np.ndarray:
    """Differential J2 force (satellite minus formation centre) in the orbital frame."""
    basis = frame_basis(orbit_phase, inclination)
    center = orbit.R0 * basis[1]
    sat = center + basis.T @ np.asarray(r, dtype=float)
    da = j2_acceleration(sat, orbit.mu) - j2_acceleration(center, orbit.mu)
    return m * (basis @ da)
