import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from formsync.attitude import (
    AttitudeState,
    SpacecraftBody,
    angular_momentum,
    body_rates,
    body_torque,
    euler_rhs,
    generalized_torque,
    inertia_params,
    inertia_regressor,
    kinetic_energy,
    lagrangian_matrices,
    lagrangian_rhs,
    mrp_acceleration,
    params_to_inertia,
    wheel_term,
)
from formsync.core_math import mrp_kinematics
from formsync.errors import SingularityGuardError

J = np.array([[150.0, 0.0, -100.0], [0.0, 270.0, 0.0], [-100.0, 0.0, 300.0]])
vec3 = arrays(np.float64, 3, elements=st.floats(-1.5, 1.5, allow_nan=False))


@given(vec3, vec3, vec3, vec3)
def test_euler_and_lagrangian_forms_agree(q, omega, u, h):
    body = SpacecraftBody(J, wheel_momentum=10 * h)
    st_ = AttitudeState.from_body_rates(q, omega)
    # Euler route: body acceleration then MRP acceleration
    qdd_euler = mrp_acceleration(body, q, omega, euler_rhs(body, omega, u, np.zeros(3)))
    qdd_lag = lagrangian_rhs(body, st_, generalized_torque(st_, u))
    assert np.allclose(qdd_euler, qdd_lag, rtol=1e-8, atol=1e-9)


@given(vec3, vec3)
def test_mass_matrix_is_spd_and_energy_consistent(q, omega):
    body = SpacecraftBody(J)
    st_ = AttitudeState.from_body_rates(q, omega)
    M, _ = lagrangian_matrices(body, st_)
    assert np.allclose(M, M.T)
    assert np.linalg.eigvalsh(M)[0] > 0
    assert np.isclose(0.5 * st_.q_dot @ M @ st_.q_dot, kinetic_energy(body, omega), rtol=1e-9, atol=1e-12)
    assert np.allclose(body_rates(st_), omega, atol=1e-10)


@given(vec3, vec3, vec3, vec3)
def test_regressor_reproduces_lagrangian_terms(q, q_dot, qr_dot, qr_ddot):
    h = np.array([1.0, -2.0, 0.5])
    body = SpacecraftBody(J, wheel_momentum=h)
    M, C = lagrangian_matrices(body, AttitudeState(q, q_dot))
    Y = inertia_regressor(q, q_dot, qr_dot, qr_ddot)
    lhs = M @ qr_ddot + C @ qr_dot
    rhs = Y @ inertia_params(J) + wheel_term(q, qr_dot, h)
    assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-8 * max(1.0, np.abs(lhs).max()))


def test_inertia_params_roundtrip():
    assert np.allclose(params_to_inertia(inertia_params(J)), J)


def test_body_torque_roundtrip_and_saturation():
    st_ = AttitudeState([0.1, -0.2, 0.3], [0.0, 0.0, 0.0])
    u = np.array([1.0, -2.0, 3.0])
    assert np.allclose(body_torque(st_, generalized_torque(st_, u)), u)
    assert np.allclose(body_torque(st_, generalized_torque(st_, u), torque_limit=1.5), [1.0, -1.5, 1.5])


def test_momentum_with_wheel():
    body = SpacecraftBody(J, wheel_momentum=[1.0, 2.0, 3.0])
    assert np.allclose(angular_momentum(body, np.zeros(3)), [1.0, 2.0, 3.0])
    # gyroscopic term is orthogonal to omega: no work done
    w = np.array([0.1, 0.2, -0.3])
    wd = euler_rhs(body, w, np.zeros(3), np.zeros(3))
    assert abs(w @ (J @ wd)) < 1e-12


@pytest.mark.parametrize(
    "kw",
    [
        {"inertia": np.eye(2)},
        {"inertia": [[1, 0.5, 0], [0, 1, 0], [0, 0, 1]]},
        {"inertia": -np.eye(3)},
        {"inertia": np.eye(3), "torque_limit": 0.0},
    ],
)
def test_body_validation(kw):
    with pytest.raises(ValueError):
        SpacecraftBody(**kw)


def test_state_validation():
    with pytest.raises(SingularityGuardError):
        AttitudeState([100.0, 0, 0], [0, 0, 0])
    with pytest.raises(ValueError):
        AttitudeState([0, 0, 0], [np.inf, 0, 0])
    s = AttitudeState.from_body_rates([0.1, 0, 0], [0, 1, 0])
    assert np.allclose(s.q_dot, mrp_kinematics([0.1, 0, 0]) @ [0, 1, 0])
