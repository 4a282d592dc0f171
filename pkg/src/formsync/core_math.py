"""Small dense linear algebra and attitude-parameterization primitives.

Conventions
-----------
* Vectors are ``numpy`` arrays of shape ``(3,)``; matrices ``(3, 3)``.
* Quaternions are scalar-last: ``(beta1, beta2, beta3, beta4)``.
* MRPs ``q = e * tan(theta / 4)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    InverseSingularError,
    NonSymmetricError,
    SingularityGuardError,
)

MRP_GUARD_ANGLE = math.radians(355.0)
MRP_GUARD = math.tan(MRP_GUARD_ANGLE / 4.0)

JACOBI_TOL = 1e-13
SYMMETRY_TOL = 1e-12
QUAT_NORM_TOL = 1e-9

def skew(x) -> np.ndarray:
    """Cross-product matrix: ``skew(x) @ y == np.cross(x, y)``."""
    x1, x2, x3 = float(x[0]), float(x[1]), float(x[2])
    return np.array([[0.0, -x3, x2], [x3, 0.0, -x1], [-x2, x1, 0.0]])


def cross3(a, b) -> np.ndarray:
    """``np.cross`` for 3-vectors without the generic-axis overhead."""
    a0, a1, a2 = float(a[0]), float(a[1]), float(a[2])
    b0, b1, b2 = float(b[0]), float(b[1]), float(b[2])
    return np.array([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])


def check_mrp(q, guard: float = MRP_GUARD) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (3,):
        raise DimensionMismatchError(f"MRP must have shape (3,), got {q.shape}")
    q1, q2, q3 = float(q[0]), float(q[1]), float(q[2])
    qq = q1 * q1 + q2 * q2 + q3 * q3
    if not math.isfinite(qq):
        raise SingularityGuardError("MRP has non-finite components")
    if qq >= guard * guard:
        raise SingularityGuardError(f"|q| = {math.sqrt(qq):.6g} outside guard bound {guard:.6g}")
    return q


def mrp_kinematics(q, guard: float = MRP_GUARD) -> np.ndarray:
    """Return Z(q) with ``q_dot = Z(q) @ omega``."""
    q1, q2, q3 = check_mrp(q, guard).tolist()
    d = 0.25 * (1.0 - (q1 * q1 + q2 * q2 + q3 * q3))
    return np.array(
        [
            [d + 0.5 * q1 * q1, 0.5 * (q1 * q2 - q3), 0.5 * (q1 * q3 + q2)],
            [0.5 * (q2 * q1 + q3), d + 0.5 * q2 * q2, 0.5 * (q2 * q3 - q1)],
            [0.5 * (q3 * q1 - q2), 0.5 * (q3 * q2 + q1), d + 0.5 * q3 * q3],
        ]
    )


def mrp_kinematics_inv(q, guard: float = MRP_GUARD) -> np.ndarray:
    """Closed-form inverse of Z(q).

    Uses ``Z = B/4`` with ``B @ B.T = (1 + q.q)^2 I``, so ``Z^-1 = 4 B^T / (1 + q.q)^2``.
    """
    q1, q2, q3 = check_mrp(q, guard).tolist()
    qq = q1 * q1 + q2 * q2 + q3 * q3
    c = 4.0 / (1.0 + qq) ** 2
    e = 1.0 - qq
    return c * np.array(
        [
            [e + 2.0 * q1 * q1, 2.0 * (q1 * q2 + q3), 2.0 * (q1 * q3 - q2)],
            [2.0 * (q2 * q1 - q3), e + 2.0 * q2 * q2, 2.0 * (q2 * q3 + q1)],
            [2.0 * (q3 * q1 + q2), 2.0 * (q3 * q2 - q1), e + 2.0 * q3 * q3],
        ]
    )


def mrp_kinematics_rate(q, q_dot) -> np.ndarray:
    """Analytic time derivative of Z(q) along ``q_dot``."""
    q1, q2, q3 = (float(v) for v in q)
    d1, d2, d3 = (float(v) for v in q_dot)
    e = -(q1 * d1 + q2 * d2 + q3 * d3)
    return 0.5 * np.array(
        [
            [e + 2.0 * d1 * q1, d1 * q2 + q1 * d2 - d3, d1 * q3 + q1 * d3 + d2],
            [d2 * q1 + q2 * d1 + d3, e + 2.0 * d2 * q2, d2 * q3 + q2 * d3 - d1],
            [d3 * q1 + q3 * d1 - d2, d3 * q2 + q3 * d2 + d1, e + 2.0 * d3 * q3],
        ]
    )


def mrp_to_quat(q, guard: float = MRP_GUARD) -> np.ndarray:
    q = check_mrp(q, guard)
    qq = float(q @ q)
    den = 1.0 + qq
    return np.array([2.0 * q[0] / den, 2.0 * q[1] / den, 2.0 * q[2] / den, (1.0 - qq) / den])


def quat_to_mrp(beta) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (4,):
        raise DimensionMismatchError(f"quaternion must have shape (4,), got {beta.shape}")
    if abs(float(np.linalg.norm(beta)) - 1.0) > QUAT_NORM_TOL:
        raise ValueError("quaternion is not unit norm")
    den = 1.0 + beta[3]
    if den <= 1e-15:
        raise InverseSingularError("beta4 = -1 maps to the MRP point at infinity")
    return beta[:3] / den


def ring_rotation(theta: float) -> np.ndarray:
    """Rotation in the x-z plane with y fixed."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


# ---------------------------------------------------------------------------
# block matrices

def jacobi_eigh(A, tol: float = JACOBI_TOL, max_sweeps: int = 100):
    """Cyclic Jacobi eigensolver for a real symmetric matrix.

    Returns ``(w, V)`` with eigenvalues ascending and eigenvectors as columns;
    each column's first non-negligible entry is made positive.
    """
    a = np.array(A, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got {a.shape}")
    scale = max(float(np.max(np.abs(a))), 1.0)
    if not np.allclose(a, a.T, rtol=0.0, atol=SYMMETRY_TOL * scale):
        raise NonSymmetricError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    v = np.eye(n)
    fro = float(np.linalg.norm(a))
    thresh = tol * max(fro, 1e-300)
    for _ in range(max_sweeps):
        off = math.sqrt(max(float(np.sum(a * a) - np.sum(np.diag(a) ** 2)), 0.0))
        if off <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # A <- J^T A J on rows/cols p, q
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    w = w[order]
    v = v[:, order]
    for k in range(n):
        col = v[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0.0:
            v[:, k] = -col
    return w, v


@dataclass(frozen=True)
class BlockMatrix:
    """A ``p x p`` grid of ``n x n`` blocks stored as one dense array."""

    data: np.ndarray
    n: int

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] % self.n:
            raise DimensionMismatchError(
                f"array of shape {data.shape} is not a grid of {self.n}x{self.n} blocks"
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("block matrix has non-finite entries")
        object.__setattr__(self, "data", data)

    @classmethod
    def from_blocks(cls, blocks) -> "BlockMatrix":
        blocks = [[np.asarray(b, dtype=float) for b in row] for row in blocks]
        n = blocks[0][0].shape[0]
        if any(b.shape != (n, n) for row in blocks for b in row):
            raise DimensionMismatchError("inconsistent block sizes")
        return cls(np.block(blocks), n)

    @classmethod
    def identity(cls, p: int, n: int) -> "BlockMatrix":
        return cls(np.eye(p * n), n)

    @property
    def p(self) -> int:
        return self.data.shape[0] // self.n

    def block(self, i: int, j: int) -> np.ndarray:
        n = self.n
        return self.data[i * n:(i + 1) * n, j * n:(j + 1) * n]

    @property
    def T(self) -> "BlockMatrix":
        return BlockMatrix(self.data.T.copy(), self.n)

    def __matmul__(self, other):
        if isinstance(other, BlockMatrix):
            if other.n != self.n or other.data.shape != self.data.shape:
                raise DimensionMismatchError("block layouts differ")
            return BlockMatrix(self.data @ other.data, self.n)
        other = np.asarray(other, dtype=float)
        if other.shape[0] != self.data.shape[1]:
            raise DimensionMismatchError(
                f"cannot multiply {self.data.shape} by {other.shape}"
            )
        return self.data @ other

    def is_symmetric(self, tol: float = SYMMETRY_TOL) -> bool:
        scale = max(float(np.max(np.abs(self.data))), 1.0)
        return bool(np.allclose(self.data, self.data.T, rtol=0.0, atol=tol * scale))

    def symmetrized(self) -> "BlockMatrix":
        return BlockMatrix(0.5 * (self.data + self.data.T), self.n)

    def eigh(self):
        return jacobi_eigh(self.data)

    def min_eig(self) -> float:
        """Smallest eigenvalue; positive iff the matrix is positive definite."""
        return float(self.eigh()[0][0])
