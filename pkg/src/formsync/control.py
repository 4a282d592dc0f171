"""Decentralized synchronization and tracking controllers.

Attitude controllers act on :class:`~formsync.attitude.AttitudeState`
lists; every controller for craft ``i`` only reads the states of its ring
neighbours. ``refs`` is a per-craft list of ``(pos, vel, acc)`` tuples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .attitude import (
    AttitudeState,
    SpacecraftBody,
    inertia_regressor,
    lagrangian_matrices,
    wheel_term,
)
from .core_math import ring_rotation
from .errors import GraphMismatchError, UnsupportedFormationSizeError
from .orbital import ReferenceOrbit, TransState, lagrangian_form


def as_diag(x, n: int = 3) -> np.ndarray:
    """Diagonal gain as a length-``n`` vector (accepts scalar, vector or diagonal matrix)."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        return np.full(n, float(a))
    if a.ndim == 2:
        if not np.allclose(a, np.diag(np.diag(a))):
            raise ValueError("gain matrix must be diagonal")
        a = np.diag(a)
    if a.shape != (n,):
        raise ValueError(f"expected {n} diagonal entries, got shape {a.shape}")
    return a.copy()


@dataclass(frozen=True)
class GainSet:
    """Attitude diagonals ``K1, K2, Lambda`` and translational scalars."""

    K1: np.ndarray
    K2: np.ndarray
    Lambda: np.ndarray
    k1: float | None = None
    k2: float | None = None
    lam: float | None = None
    mass_scale: tuple[float, ...] | None = None

    def __post_init__(self):
        K1, K2, Lam = as_diag(self.K1), as_diag(self.K2), as_diag(self.Lambda)
        if np.any(K1 <= 0.0) or np.any(Lam <= 0.0):
            raise ValueError("K1 and Lambda must be strictly positive")
        if np.any(K2 < 0.0):
            raise ValueError("K2 must be non-negative")
        for name in ("k1", "k2", "lam"):
            v = getattr(self, name)
            if v is not None and not v > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.mass_scale is not None and any(not c > 0.0 for c in self.mass_scale):
            raise ValueError("mass_scale entries must be positive")
        object.__setattr__(self, "K1", K1)
        object.__setattr__(self, "K2", K2)
        object.__setattr__(self, "Lambda", Lam)

    def scale_for(self, i: int) -> float:
        return 1.0 if self.mass_scale is None else float(self.mass_scale[i])


@dataclass(frozen=True)
class PartialCouplingMask:
    P: np.ndarray = field(default_factory=lambda: np.ones(3))

    def __post_init__(self):
        P = as_diag(self.P)
        if not np.all((P == 0.0) | (P == 1.0)):
            raise ValueError("coupling mask entries must be 0 or 1")
        object.__setattr__(self, "P", P)


@dataclass
class AdaptiveState:
    """Inertia estimate ``(J11, J22, J33, J12, J13, J23)`` and adaptation gain."""

    a_hat: np.ndarray
    Gamma: np.ndarray

    def __post_init__(self):
        self.a_hat = np.asarray(self.a_hat, dtype=float).reshape(6)
        G = np.asarray(self.Gamma, dtype=float)
        if G.ndim < 2:
            G = np.diag(np.broadcast_to(G, (6,)))
        if G.shape != (6, 6) or not np.allclose(G, G.T) or np.linalg.eigvalsh(G)[0] <= 0.0:
            raise ValueError("Gamma must be a symmetric positive definite 6x6 matrix")
        self.Gamma = G


# ---------------------------------------------------------------------------
# references

@dataclass(frozen=True)
class SinusoidChannel:
    amplitude: float = 0.0
    freq_hz: float = 0.0
    phase: float = 0.0
    bias: float = 0.0

    def __post_init__(self):
        if self.freq_hz < 0.0:
            raise ValueError("frequency must be non-negative")

    def __call__(self, t: float):
        w = 2.0 * math.pi * self.freq_hz
        arg = w * t + self.phase
        sn, cs = math.sin(arg), math.cos(arg)
        A = self.amplitude
        return self.bias + A * sn, A * w * cs, -A * w * w * sn


@dataclass(frozen=True)
class AttitudeReference:
    """Per-channel MRP sinusoids.

    ``rotation_rate`` (rad/s) turns channel ``rotation_axis`` into a steady
    rotation ``tan((rate t + phase)/4)``; used to slave the attitude to the
    rotation of a circular position reference.
    """

    channels: tuple[SinusoidChannel, SinusoidChannel, SinusoidChannel] = (
        SinusoidChannel(),
        SinusoidChannel(),
        SinusoidChannel(),
    )
    rotation_rate: float | None = None
    rotation_axis: int = 2
    rotation_phase: float = 0.0

    def __call__(self, t: float):
        pos, vel, acc = np.zeros(3), np.zeros(3), np.zeros(3)
        for k, ch in enumerate(self.channels):
            pos[k], vel[k], acc[k] = ch(t)
        if self.rotation_rate is not None:
            k = self.rotation_axis
            vd = 0.25 * self.rotation_rate
            f = math.tan(vd * t + 0.25 * self.rotation_phase)
            fd = vd * (1.0 + f * f)
            pos[k], vel[k], acc[k] = f, fd, 2.0 * vd * f * fd
        return pos, vel, acc

    def coefficients(self) -> np.ndarray:
        """``(3, 4)`` rows of ``bias, amplitude, omega, phase`` for the kernels."""
        if self.rotation_rate is not None:
            raise ValueError("rotating references have no sinusoid coefficients")
        return np.array(
            [[c.bias, c.amplitude, 2.0 * math.pi * c.freq_hz, c.phase] for c in self.channels]
        )


@dataclass(frozen=True)
class SpiralReference:
    """Spiral/circle in the x-z plane of the orbital frame.

    ``convention="cos_x"``: ``(a cos wt, y_d, a sin wt)``;
    ``convention="sin_x"``: ``(a sin wt, y_d, a cos wt)``.
    ``y_d(t) = y_bias + y_amp sin(y_freq t + y_phase)`` (y_freq in rad/s).
    """

    a0: float
    omega: float
    a_rate: float = 0.0
    y_bias: float = 0.0
    y_amp: float = 0.0
    y_freq: float = 0.0
    y_phase: float = 0.0
    convention: str = "cos_x"

    def __post_init__(self):
        if self.omega == 0.0:
            raise ValueError("spiral angular rate must be non-zero")
        if self.convention not in ("cos_x", "sin_x"):
            raise ValueError(f"unknown convention {self.convention!r}")

    def radius(self, t: float) -> float:
        return self.a0 + self.a_rate * t

    def __call__(self, t: float):
        a, ad = self.a0 + self.a_rate * t, self.a_rate
        w = self.omega
        c, s = math.cos(w * t), math.sin(w * t)
        # (a cos, a sin) and derivatives
        u = (a * c, a * s)
        ud = (ad * c - a * w * s, ad * s + a * w * c)
        udd = (-2.0 * ad * w * s - a * w * w * c, 2.0 * ad * w * c - a * w * w * s)
        if self.convention == "sin_x":
            u, ud, udd = u[::-1], ud[::-1], udd[::-1]
        ya = self.y_freq * t + self.y_phase
        y = self.y_bias + self.y_amp * math.sin(ya)
        yd = self.y_amp * self.y_freq * math.cos(ya)
        ydd = -self.y_amp * self.y_freq**2 * math.sin(ya)
        return (
            np.array([u[0], y, u[1]]),
            np.array([ud[0], yd, ud[1]]),
            np.array([udd[0], ydd, udd[1]]),
        )

    def parameters(self) -> np.ndarray:
        """Flat parameter vector used by the kernels."""
        return np.array(
            [
                self.a0,
                self.a_rate,
                self.omega,
                0.0 if self.convention == "cos_x" else 1.0,
                self.y_bias,
                self.y_amp,
                self.y_freq,
                self.y_phase,
            ]
        )


@dataclass(frozen=True)
class ReferenceSpec:
    """References for a formation.

    ``sources[i]`` is ``None`` for an external reference or the index of the
    craft whose state craft ``i`` tracks (concurrent synchronization).
    ``phase_offsets`` default to ``i * 2 pi / p``.
    """

    attitude: AttitudeReference | None = None
    translation: SpiralReference | None = None
    sources: tuple[int | None, ...] | None = None
    phase_offsets: tuple[float, ...] | None = None

    def source(self, i: int) -> int | None:
        return None if self.sources is None else self.sources[i]

    def phase_offset(self, i: int, p: int) -> float:
        if self.phase_offsets is not None:
            return float(self.phase_offsets[i])
        return i * 2.0 * math.pi / p


def reference_eval(spec: ReferenceSpec, i: int, t: float, kind: str = "attitude", p: int = 1):
    """Analytic ``(pos, vel, acc)`` of craft ``i``'s external reference at ``t``."""
    if t < 0.0:
        raise ValueError("reference time must be non-negative")
    if kind == "attitude":
        if spec.attitude is None:
            raise ValueError("no attitude reference configured")
        return spec.attitude(t)
    if kind == "translation":
        if spec.translation is None:
            raise ValueError("no translation reference configured")
        T = ring_rotation(spec.phase_offset(i, p))
        pos, vel, acc = spec.translation(t)
        return T @ pos, T @ vel, T @ acc
    raise ValueError(f"unknown reference kind {kind!r}")


# ---------------------------------------------------------------------------
# coupling graph

def ring_weights(p: int, directed: bool = False) -> np.ndarray:
    """Neighbour weights of a (two-way or one-way) ring; ``p = 2`` couples once."""
    if p < 1:
        raise ValueError("formation needs at least one craft")
    W = np.zeros((p, p))
    if p == 1:
        return W
    if p == 2:
        # one-way or two-way, each craft reads the other exactly once
        W[0, 1] = W[1, 0] = 1.0
        return W
    for i in range(p):
        W[i, (i - 1) % p] = 1.0
        if not directed:
            W[i, (i + 1) % p] = 1.0
    return W


def _check_weights(weights, p: int) -> np.ndarray:
    W = ring_weights(p) if weights is None else np.asarray(weights, dtype=float)
    if W.shape != (p, p):
        raise GraphMismatchError(f"weights of shape {W.shape} for {p} craft")
    if np.any(np.diag(W) != 0.0):
        raise GraphMismatchError("self-coupling is not allowed")
    return W


def composite_vars(q, q_dot, ref_pos, ref_vel, ref_acc, Lambda):
    """Return ``(q_dot_r, q_ddot_r, s)``."""
    lam = as_diag(Lambda, np.size(q))
    if np.any(lam <= 0.0):
        raise ValueError("Lambda must be strictly positive")
    q = np.asarray(q, dtype=float)
    q_dot = np.asarray(q_dot, dtype=float)
    ref_pos = np.asarray(ref_pos, dtype=float)
    ref_vel = np.asarray(ref_vel, dtype=float)
    qr_dot = ref_vel + lam * (ref_pos - q)
    qr_ddot = np.asarray(ref_acc, dtype=float) + lam * (ref_vel - q_dot)
    return qr_dot, qr_ddot, q_dot - qr_dot


def _all_composites(states, refs, Lambda):
    if len(states) != len(refs):
        raise GraphMismatchError("one reference per craft is required")
    return [composite_vars(st.q, st.q_dot, *ref, Lambda) for st, ref in zip(states, refs)]


def _coupling(i: int, W: np.ndarray, K2: np.ndarray, comps) -> np.ndarray:
    out = np.zeros(3)
    for j in range(W.shape[0]):
        if W[i, j] != 0.0:
            out = out + W[i, j] * (K2 * comps[j][2])
    return out


def attitude_sync_control(
    i: int,
    states: Sequence[AttitudeState],
    refs,
    gains: GainSet,
    body_i: SpacecraftBody,
    weights=None,
    mask: PartialCouplingMask | None = None,
) -> np.ndarray:
    """Generalized torque ``M q_ddot_r + C q_dot_r - K1 s_i + sum_j w_ij K2 s_j``."""
    p = len(states)
    W = _check_weights(weights, p)
    comps = _all_composites(states, refs, gains.Lambda)
    K2 = gains.K2 if mask is None else gains.K2 * mask.P
    qr_dot, qr_ddot, s = comps[i]
    M, C = lagrangian_matrices(body_i, states[i])
    return M @ qr_ddot + C @ qr_dot - gains.K1 * s + _coupling(i, W, K2, comps)


def attitude_sync_control_relative(
    i: int,
    states: Sequence[AttitudeState],
    refs,
    gains: GainSet,
    body_i: SpacecraftBody,
    weights=None,
) -> np.ndarray:
    """Same law written with relative attitudes/rates (common reference only)."""
    p = len(states)
    W = _check_weights(weights, p)
    lam = gains.Lambda
    qr_dot, qr_ddot, s = composite_vars(states[i].q, states[i].q_dot, *refs[i], lam)
    M, C = lagrangian_matrices(body_i, states[i])
    deg = float(W[i].sum())
    tau = M @ qr_ddot + C @ qr_dot - (gains.K1 - deg * gains.K2) * s
    for j in range(p):
        if W[i, j] != 0.0:
            rel = (states[j].q_dot - states[i].q_dot) + lam * (states[j].q - states[i].q)
            tau = tau + W[i, j] * (gains.K2 * rel)
    return tau


def partial_coupling_control(i, states, refs, gains, mask: PartialCouplingMask, body_i, weights=None):
    """Ring law with the neighbour coupling restricted to the channels in ``mask``."""
    return attitude_sync_control(i, states, refs, gains, body_i, weights, mask)


def pd_coupling_control(i: int, states, refs, gains: GainSet) -> np.ndarray:
    """Linear diffusive PD coupling ``-K1 (q_dot_i + L e_i) + K2 (q_dot_j + L e_j)``."""
    if len(states) != 2:
        raise UnsupportedFormationSizeError("PD coupling baseline is defined for two craft")
    j = 1 - i
    lam = gains.Lambda

    def term(k):
        return states[k].q_dot + lam * (states[k].q - np.asarray(refs[k][0], dtype=float))

    return -gains.K1 * term(i) + gains.K2 * term(j)


def adaptive_sync_control(
    i: int,
    states,
    refs,
    gains: GainSet,
    adaptive_state: AdaptiveState,
    body_i: SpacecraftBody | None = None,
    weights=None,
):
    """Certainty-equivalence ring law; returns ``(tau_i, a_hat_dot)``."""
    p = len(states)
    W = _check_weights(weights, p)
    comps = _all_composites(states, refs, gains.Lambda)
    qr_dot, qr_ddot, s = comps[i]
    st = states[i]
    Y = inertia_regressor(st.q, st.q_dot, qr_dot, qr_ddot)
    tau = Y @ adaptive_state.a_hat - gains.K1 * s + _coupling(i, W, gains.K2, comps)
    if body_i is not None and np.any(body_i.wheel_momentum):
        tau = tau + wheel_term(st.q, qr_dot, body_i.wheel_momentum)
    a_hat_dot = -adaptive_state.Gamma @ (Y.T @ s)
    return tau, a_hat_dot


def phase_sync_control(
    i: int,
    trans_states: Sequence[TransState],
    refs,
    gains: GainSet,
    p: int,
    orbit: ReferenceOrbit,
    m_i: float,
    weights=None,
    phase_offsets: Sequence[float] | None = None,
) -> np.ndarray:
    """Translational phase-synchronization force for craft ``i``.

    ``refs`` must already be the phase-shifted references of each craft.
    Neighbour ``j`` is coupled through ``T(theta_i - theta_j)``, which is
    ``T(theta)`` for the previous and ``T(theta)^T`` for the next craft.
    """
    if len(trans_states) != p or len(refs) != p:
        raise GraphMismatchError("state/reference count does not match p")
    if gains.k1 is None or gains.k2 is None or gains.lam is None:
        raise ValueError("translational gains k1, k2, lam are required")
    W = _check_weights(weights, p)
    offsets = [i_ * 2.0 * math.pi / p for i_ in range(p)] if phase_offsets is None else phase_offsets
    lam = gains.lam
    comps = [
        composite_vars(st.r, st.r_dot, *ref, np.full(3, lam)) for st, ref in zip(trans_states, refs)
    ]
    r_i = trans_states[i].r
    M, C, D, g = lagrangian_form(orbit, m_i, r_i)
    sc = gains.scale_for(i)
    qr_dot, qr_ddot, s = comps[i]
    F = M @ qr_ddot + C @ qr_dot + D @ r_i + g - sc * gains.k1 * s
    for j in range(p):
        if W[i, j] != 0.0:
            T = ring_rotation(offsets[i] - offsets[j])
            F = F + W[i, j] * sc * gains.k2 * (T @ comps[j][2])
    return F
