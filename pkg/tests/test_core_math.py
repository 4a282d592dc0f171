import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from formsync.core_math import (
    MRP_GUARD,
    BlockMatrix,
    check_mrp,
    cross3,
    jacobi_eigh,
    mrp_kinematics,
    mrp_kinematics_inv,
    mrp_kinematics_rate,
    mrp_to_quat,
    quat_to_mrp,
    ring_rotation,
    skew,
)
from formsync.errors import (
    DimensionMismatchError,
    InverseSingularError,
    NonSymmetricError,
    SingularityGuardError,
)

finite = st.floats(-2.0, 2.0, allow_nan=False)
vec3 = arrays(np.float64, 3, elements=finite)


def quat_rate(beta, omega):
    # scalar-last quaternion driven by body rates
    bv, b4 = beta[:3], beta[3]
    return np.concatenate([0.5 * (b4 * omega + np.cross(bv, omega)), [-0.5 * bv @ omega]])


@given(vec3, vec3)
def test_skew_and_cross3_match_numpy(a, b):
    assert np.allclose(skew(a) @ b, np.cross(a, b), atol=1e-12)
    assert np.allclose(cross3(a, b), np.cross(a, b), atol=1e-12)


@given(vec3, vec3)
def test_kinematics_against_quaternion_route(q, omega):
    # q_dot from Z must equal the derivative of quat_to_mrp along quaternion kinematics
    beta = mrp_to_quat(q)
    h = 1e-6
    qp = quat_to_mrp(_unit(beta + h * quat_rate(beta, omega)))
    qm = quat_to_mrp(_unit(beta - h * quat_rate(beta, omega)))
    fd = (qp - qm) / (2 * h)
    assert np.allclose(mrp_kinematics(q) @ omega, fd, rtol=1e-6, atol=1e-6)


def _unit(b):
    return b / np.linalg.norm(b)


@given(vec3)
def test_inverse_is_inverse(q):
    Z = mrp_kinematics(q)
    assert np.allclose(mrp_kinematics_inv(q) @ Z, np.eye(3), atol=1e-10)
    assert np.allclose(mrp_kinematics_inv(q), np.linalg.inv(Z), rtol=1e-9, atol=1e-12)


@given(vec3, vec3)
def test_kinematics_rate_is_derivative(q, q_dot):
    h = 1e-6
    fd = (mrp_kinematics(q + h * q_dot) - mrp_kinematics(q - h * q_dot)) / (2 * h)
    assert np.allclose(mrp_kinematics_rate(q, q_dot), fd, atol=1e-7)


@given(vec3)
def test_quaternion_roundtrip(q):
    beta = mrp_to_quat(q)
    assert math.isclose(np.linalg.norm(beta), 1.0, abs_tol=1e-12)
    assert np.allclose(quat_to_mrp(beta), q, atol=1e-12)


def test_guard_and_shapes():
    assert math.isclose(MRP_GUARD, math.tan(math.radians(355) / 4))
    with pytest.raises(SingularityGuardError):
        check_mrp([MRP_GUARD, 0.0, 0.0])
    with pytest.raises(SingularityGuardError):
        mrp_kinematics([np.nan, 0.0, 0.0])
    with pytest.raises(DimensionMismatchError):
        check_mrp([0.0, 0.0])
    with pytest.raises(InverseSingularError):
        quat_to_mrp([0.0, 0.0, 0.0, -1.0])
    with pytest.raises(ValueError):
        quat_to_mrp([1.0, 1.0, 0.0, 0.0])


def test_ring_rotation():
    T = ring_rotation(2 * math.pi / 3)
    assert np.allclose(T @ T.T, np.eye(3))
    assert np.allclose(T @ [0, 1, 0], [0, 1, 0])
    assert np.allclose(np.linalg.matrix_power(T, 3), np.eye(3), atol=1e-12)
    assert np.allclose(ring_rotation(math.pi / 2) @ [1, 0, 0], [0, 0, 1])


@settings(max_examples=50)
@given(st.integers(1, 9), st.integers(0, 2**31 - 1))
def test_jacobi_matches_lapack(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n))
    A = A + A.T
    w, V = jacobi_eigh(A)
    assert np.allclose(w, np.linalg.eigvalsh(A), atol=1e-10 * max(1.0, np.abs(A).max()))
    assert np.allclose(V.T @ V, np.eye(n), atol=1e-10)
    assert np.allclose(V @ np.diag(w) @ V.T, A, atol=1e-10)


def test_jacobi_rejects_bad_input():
    with pytest.raises(NonSymmetricError):
        jacobi_eigh([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(DimensionMismatchError):
        jacobi_eigh(np.zeros((2, 3)))


def test_jacobi_repeated_eigenvalues():
    w, V = jacobi_eigh(np.diag([3.0, 1.0, 3.0]))
    assert np.allclose(w, [1.0, 3.0, 3.0])
    assert np.all(np.isfinite(V))


def test_block_matrix():
    I = np.eye(2)
    B = BlockMatrix.from_blocks([[2 * I, -I], [-I, 2 * I]])
    assert B.p == 2 and B.n == 2
    assert np.allclose(B.block(0, 1), -I)
    assert B.is_symmetric()
    assert math.isclose(B.min_eig(), 1.0)
    C = B @ BlockMatrix.identity(2, 2)
    assert np.allclose(C.data, B.data)
    assert np.allclose(B @ np.ones(4), np.ones(4))
    with pytest.raises(DimensionMismatchError):
        BlockMatrix(np.zeros((3, 3)), 2)
    with pytest.raises(DimensionMismatchError):
        B @ np.ones(3)
    N = BlockMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]), 1)
    assert not N.is_symmetric()
    assert N.symmetrized().is_symmetric()
    assert np.allclose(N.T.data, N.data.T)
