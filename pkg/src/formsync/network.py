"""Block coupling matrix, its spectral split and stability/robustness checks.

The closed loop of the ring controller reads ``[M] s_dot + [C] s + L s = d``
with ``L`` carrying ``K1`` on the diagonal blocks and ``-K2`` on the
neighbour blocks. ``L`` is not a graph Laplacian: its block-row sums are
``K1 - 2 K2`` (``K1 - K2`` for two craft), which is the tracking rate.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import qmc

from .attitude import SpacecraftBody
from .control import as_diag, ring_weights
from .core_math import MRP_GUARD, BlockMatrix, jacobi_eigh, mrp_kinematics_inv, ring_rotation
from .errors import (
    DimensionMismatchError,
    NonSymmetricError,
    NotContractingError,
    UnsupportedTopologyError,
)

# eigenvalues within this fraction of the largest |eigenvalue| count as zero
EIG_ZERO_RTOL = 1e-10


@dataclass(frozen=True)
class CouplingMatrix:
    L: BlockMatrix
    weights: np.ndarray
    directed: bool = False

    @property
    def p(self) -> int:
        return self.L.p

    @property
    def n(self) -> int:
        return self.L.n

    @property
    def matrix(self) -> np.ndarray:
        return self.L.data

    def symmetric_part(self) -> BlockMatrix:
        return self.L.symmetrized() if self.directed else self.L


def _gain_matrix(K, n: int | None = None) -> np.ndarray:
    a = np.asarray(K, dtype=float)
    if a.ndim == 2:
        return a
    if n is None:
        n = 3 if a.ndim == 0 else a.shape[0]
    return np.diag(as_diag(a, n))


def build_coupling_matrix(p: int, K1, K2, topology="ring") -> CouplingMatrix:
    """``topology``: ``"ring"``, ``"directed_ring"`` or a ``p x p`` weight array."""
    if p < 2:
        raise UnsupportedTopologyError("coupling needs at least two craft")
    K1m = _gain_matrix(K1)
    n = K1m.shape[0]
    K2m = _gain_matrix(K2, n)
    if K2m.shape != (n, n):
        raise DimensionMismatchError("K1 and K2 sizes differ")
    if np.any(np.diag(K1m) <= 0.0) or np.any(np.diag(K2m) < 0.0):
        raise ValueError("K1 must be positive and K2 non-negative")
    if isinstance(topology, str):
        if topology not in ("ring", "directed_ring"):
            raise UnsupportedTopologyError(f"unknown topology {topology!r}")
        directed = topology == "directed_ring" and p > 2
        W = ring_weights(p, directed=directed)
    else:
        W = np.asarray(topology, dtype=float)
        if W.shape != (p, p):
            raise DimensionMismatchError(f"weights of shape {W.shape} for {p} craft")
        if np.any(np.diag(W) != 0.0) or np.any(W < 0.0):
            raise UnsupportedTopologyError("weights must be non-negative without self loops")
        directed = not np.array_equal(W, W.T)
    rows, cols = W.sum(axis=1), W.sum(axis=0)
    if not (np.allclose(rows, rows[0]) and np.allclose(cols, rows[0])):
        raise UnsupportedTopologyError("only regular (balanced) graphs are supported")
    L = np.kron(np.eye(p), K1m) - np.kron(W, K2m)
    return CouplingMatrix(BlockMatrix(L, n), W, directed)


def helmert_complement(p: int) -> np.ndarray:
    """Orthonormal ``p x (p-1)`` basis orthogonal to the all-ones vector."""
    H = np.zeros((p, p - 1))
    for k in range(1, p):
        c = 1.0 / math.sqrt(k * (k + 1))
        H[:k, k - 1] = c
        H[k, k - 1] = -k * c
    return H


@dataclass(frozen=True)
class SyncBasis:
    one_block: np.ndarray
    V_sync: np.ndarray
    D1: np.ndarray
    D2: np.ndarray

    @property
    def V(self) -> np.ndarray:
        return np.hstack([self.one_block, self.V_sync])

    @property
    def p(self) -> int:
        return self.one_block.shape[0] // self.one_block.shape[1]

    def reconstruct(self) -> np.ndarray:
        return self.one_block @ self.D1 @ self.one_block.T + self.V_sync @ self.D2 @ self.V_sync.T


def spectral_analysis(L) -> SyncBasis:
    """Split ``L`` into its action on the common mode and on its complement.

    ``D1`` is the (generally non-diagonal) ``n x n`` block ``[1]^T L [1]``;
    ``D2`` is diagonal, from a Jacobi eigensolve of ``L`` restricted to the
    complement, so ``V_sync`` is orthonormal by construction.
    """
    Lb = L.L if isinstance(L, CouplingMatrix) else L
    if not isinstance(Lb, BlockMatrix):
        raise TypeError("expected a CouplingMatrix or BlockMatrix")
    if not Lb.is_symmetric():
        raise NonSymmetricError("spectral split needs a symmetric coupling matrix")
    p, n = Lb.p, Lb.n
    A = Lb.data
    one = np.kron(np.ones((p, 1)), np.eye(n)) / math.sqrt(p)
    Q = np.kron(helmert_complement(p), np.eye(n))
    LQ = A @ Q
    # the common mode must be invariant, otherwise there is no clean split
    scale = max(float(np.abs(A).max()), 1.0)
    if np.abs(one.T @ LQ).max() > 1e-10 * scale:
        raise UnsupportedTopologyError("common mode is not an invariant subspace of L")
    w, Wv = jacobi_eigh(Q.T @ LQ)
    D1 = one.T @ A @ one
    return SyncBasis(one, Q @ Wv, 0.5 * (D1 + D1.T), np.diag(w))


def ring_spectrum(p: int, K1: float, K2: float) -> np.ndarray:
    """Closed-form per-DOF spectrum of a two-way ring, ascending."""
    if p == 2:
        return np.sort(np.array([K1 - K2, K1 + K2]))
    k = np.arange(p)
    return np.sort(K1 - 2.0 * K2 * np.cos(2.0 * math.pi * k / p))


@dataclass
class ConditionReport:
    p: int
    n: int
    directed: bool
    min_eig_L: float
    D1_max: float
    D2_min: float
    tracking_ok: bool
    sync_ok: bool
    timescale_ok: bool
    alpha_max: float
    semidefinite: bool
    notes: list[str] = field(default_factory=list)
    robustness: "RobustnessBound | None" = None

    @property
    def all_ok(self) -> bool:
        return self.tracking_ok and self.sync_ok and self.timescale_ok

    def to_dict(self) -> dict:
        return asdict(self)


def check_conditions(L: CouplingMatrix, Lambda, p: int | None = None, directed: bool | None = None) -> ConditionReport:
    if p is not None and p != L.p:
        raise DimensionMismatchError(f"p = {p} but coupling matrix has {L.p} craft")
    directed = L.directed if directed is None else directed
    Ls = L.L.symmetrized() if (directed or not L.L.is_symmetric()) else L.L
    notes = []
    if directed:
        notes.append("directed graph: conditions evaluated on (L + L^T)/2")
    w = Ls.eigh()[0]
    scale = max(float(np.abs(w).max()), 1e-300)
    zero = EIG_ZERO_RTOL * scale
    basis = spectral_analysis(Ls)
    d1 = np.linalg.eigvalsh(basis.D1)
    d2 = np.diag(basis.D2)
    tracking_ok = bool(w[0] > zero)
    sync_ok = bool(d2.min() > zero)
    timescale_ok = bool(d2.min() > d1.max())
    alpha = 0.0
    if tracking_ok:
        lam = np.sqrt(as_diag(Lambda, L.n))
        S = np.kron(np.eye(L.p), np.diag(lam))
        alpha = 4.0 * float(jacobi_eigh(S @ Ls.data @ S)[0][0])
    semidefinite = bool(abs(w[0]) <= zero and sync_ok)
    if semidefinite:
        notes.append("common mode is marginal: crafts reach agreement but do not track")
    return ConditionReport(
        p=L.p,
        n=L.n,
        directed=bool(directed),
        min_eig_L=float(w[0]),
        D1_max=float(d1.max()),
        D2_min=float(d2.min()),
        tracking_ok=tracking_ok,
        sync_ok=sync_ok,
        timescale_ok=timescale_ok,
        alpha_max=alpha,
        semidefinite=semidefinite,
        notes=notes,
    )


def phase_rotations(p: int, offsets: Sequence[float] | None = None) -> list[np.ndarray]:
    if offsets is None:
        offsets = [i * 2.0 * math.pi / p for i in range(p)]
    return [ring_rotation(th) for th in offsets]


def sync_error(stack, basis: SyncBasis, rotations: Sequence[np.ndarray] | None = None):
    """``(||V_sync^T x||, ||[1]^T x||)`` of a per-craft stack.

    ``stack`` is ``(p, n)`` or flat ``(p n,)``. ``rotations[i]`` is applied
    transposed to craft ``i``'s entry first (phase-shifted formations).
    """
    x = np.asarray(stack, dtype=float)
    pn = basis.one_block.shape[0]
    n = basis.one_block.shape[1]
    if x.size != pn:
        raise DimensionMismatchError(f"stack of size {x.size} for a basis of size {pn}")
    x = x.reshape(pn // n, n)
    if rotations is not None:
        x = np.stack([R.T @ xi for R, xi in zip(rotations, x)])
    x = x.reshape(pn)
    return float(np.linalg.norm(basis.V_sync.T @ x)), float(np.linalg.norm(basis.one_block.T @ x))


# ---------------------------------------------------------------------------
# disturbance robustness

@dataclass(frozen=True)
class RobustnessBound:
    gamma: float
    Delta: float
    R_bound: float
    lambda_max: float
    robust_ok: bool
    m_min: float
    m_max: float

    def __post_init__(self):
        for name in ("gamma", "Delta", "R_bound", "lambda_max", "m_min", "m_max"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")


def envelope_samples(n_samples: int = 1024, radius: float = 1.0) -> np.ndarray:
    """Deterministic Sobol points filling the MRP ball of the given radius."""
    if not 0.0 < radius < MRP_GUARD:
        raise ValueError("envelope radius must lie inside the singularity guard")
    m = max(int(math.ceil(math.log2(max(n_samples, 2)))), 1)
    pts = qmc.Sobol(d=3, scramble=False).random_base2(m)[:n_samples]
    pts = radius * (2.0 * pts - 1.0)
    norms = np.linalg.norm(pts, axis=1)
    out = norms > radius
    # project the cube corners onto the sphere so the whole shell is covered
    pts[out] *= (radius / norms[out])[:, None]
    return pts


def attitude_metric_bounds(bodies: Sequence[SpacecraftBody], samples) -> tuple[float, float]:
    """Extreme eigenvalues of ``M(q) = Z^-T J Z^-1`` over the sample set."""
    lo, hi = math.inf, 0.0
    for q in samples:
        Zi = mrp_kinematics_inv(q)
        for b in bodies:
            M = Zi.T @ b.inertia @ Zi
            w = np.linalg.eigvalsh(0.5 * (M + M.T))
            lo, hi = min(lo, w[0]), max(hi, w[-1])
    return float(lo), float(hi)


def weighted_attitude_disturbance(bodies: Sequence[SpacecraftBody], d_body) -> float:
    """``||Theta^-T Delta||`` for body-frame disturbances ``d_body[i]``.

    With ``tau = Z^-T d`` and ``M = Z^-T J Z^-1`` one has
    ``tau^T M^-1 tau = d^T J^-1 d``, independent of the attitude.
    """
    d = np.asarray(d_body, dtype=float).reshape(len(bodies), 3)
    return math.sqrt(sum(float(di @ b.inertia_inv @ di) for b, di in zip(bodies, d)))


def disturbance_ball(
    L,
    gamma: float,
    Delta: float,
    m_bounds: tuple[float, float],
    weighted_delta: float | None = None,
) -> RobustnessBound:
    """Radius of the ball the weighted composite error converges to.

    Contraction rate ``(lambda_min(L) - gamma) / m_max``. The weighted
    disturbance ``sup ||Theta^-T Delta||`` defaults to ``Delta / sqrt(m_min)``.
    """
    if gamma < 0.0 or Delta < 0.0:
        raise ValueError("gamma and Delta must be non-negative")
    m_min, m_max = m_bounds
    if not 0.0 < m_min <= m_max:
        raise ValueError("inertia metric bounds must satisfy 0 < m_min <= m_max")
    Lb = L.symmetric_part() if isinstance(L, CouplingMatrix) else L
    lmin = Lb.min_eig()
    if lmin <= gamma:
        raise NotContractingError(f"min eig L = {lmin:.6g} does not exceed gamma = {gamma:.6g}")
    rate = (lmin - gamma) / m_max
    wd = Delta / math.sqrt(m_min) if weighted_delta is None else weighted_delta
    return RobustnessBound(gamma, Delta, wd / rate, rate, True, m_min, m_max)
