import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from formsync.attitude import AttitudeState, SpacecraftBody, inertia_params, lagrangian_matrices, lagrangian_rhs
from formsync.control import (
    AdaptiveState,
    AttitudeReference,
    GainSet,
    PartialCouplingMask,
    ReferenceSpec,
    SinusoidChannel,
    SpiralReference,
    adaptive_sync_control,
    as_diag,
    attitude_sync_control,
    attitude_sync_control_relative,
    composite_vars,
    partial_coupling_control,
    pd_coupling_control,
    phase_sync_control,
    reference_eval,
    ring_weights,
)
from formsync.core_math import ring_rotation
from formsync.errors import GraphMismatchError, UnsupportedFormationSizeError
from formsync.orbital import ReferenceOrbit, TransState, lagrangian_form, relative_rhs

J = np.array([[150.0, 0.0, -100.0], [0.0, 270.0, 0.0], [-100.0, 0.0, 300.0]])
BODY = SpacecraftBody(J)
GAINS = GainSet(300.0, 100.0, 20.0)
small = arrays(np.float64, (3, 3), elements=st.floats(-0.4, 0.4, allow_nan=False))


def _setup(p, X):
    states = [AttitudeState(X[i % 3], X[(i + 1) % 3]) for i in range(p)]
    ref = AttitudeReference((SinusoidChannel(0.3, 0.01), SinusoidChannel(0.2, 0.02, 0.5), SinusoidChannel()))
    refs = [ref(1.7)] * p
    return states, refs


def _sdot(body, st_, tau, ref):
    qr_dot, qr_ddot, s = composite_vars(st_.q, st_.q_dot, *ref, GAINS.Lambda)
    qdd = lagrangian_rhs(body, st_, tau)
    return s, qdd - qr_ddot


@given(small, st.integers(2, 4))
def test_sync_law_closed_loop_is_linear_in_s(X, p):
    states, refs = _setup(p, X)
    W = ring_weights(p)
    ss = [composite_vars(s.q, s.q_dot, *r, GAINS.Lambda)[2] for s, r in zip(states, refs)]
    for i in range(p):
        tau = attitude_sync_control(i, states, refs, GAINS, BODY)
        s, sd = _sdot(BODY, states[i], tau, refs[i])
        M, C = lagrangian_matrices(BODY, states[i])
        coupling = sum(W[i, j] * GAINS.K2 * ss[j] for j in range(p))
        res = M @ sd + C @ s + GAINS.K1 * s - coupling
        assert np.allclose(res, 0.0, atol=1e-8 * max(1.0, np.abs(M @ sd).max()))


@given(small)
def test_relative_form_equals_absolute_form(X):
    states, refs = _setup(3, X)
    for i in range(3):
        a = attitude_sync_control(i, states, refs, GAINS, BODY)
        b = attitude_sync_control_relative(i, states, refs, GAINS, BODY)
        assert np.allclose(a, b, atol=1e-9)


@given(small)
def test_adaptive_law_with_true_parameters(X):
    states, refs = _setup(2, X)
    ad = AdaptiveState(inertia_params(J), 10.0)
    tau, a_dot = adaptive_sync_control(0, states, refs, GAINS, ad, BODY)
    assert np.allclose(tau, attitude_sync_control(0, states, refs, GAINS, BODY), atol=1e-8)
    assert a_dot.shape == (6,)


def test_partial_mask_removes_channel():
    states, refs = _setup(2, np.array([[0.1, 0.2, -0.1], [0.0, 0.1, 0.3], [0.2, -0.2, 0.0]]))
    mask = PartialCouplingMask([1, 0, 1])
    full = attitude_sync_control(0, states, refs, GAINS, BODY)
    part = partial_coupling_control(0, states, refs, GAINS, mask, BODY)
    s1 = composite_vars(states[1].q, states[1].q_dot, *refs[1], GAINS.Lambda)[2]
    assert np.allclose(full - part, [0.0, 100.0 * s1[1], 0.0])
    with pytest.raises(ValueError):
        PartialCouplingMask([1, 0.5, 1])


def test_pd_law():
    states, refs = _setup(2, np.array([[0.1, 0.2, -0.1], [0.0, 0.1, 0.3], [0.2, -0.2, 0.0]]))
    g = GainSet(1000.0, 300.0, 0.3)
    tau = pd_coupling_control(0, states, refs, g)
    e = [s.q_dot + 0.3 * (s.q - r[0]) for s, r in zip(states, refs)]
    assert np.allclose(tau, -1000 * e[0] + 300 * e[1])
    with pytest.raises(UnsupportedFormationSizeError):
        pd_coupling_control(0, states * 2, refs * 2, g)


@settings(max_examples=30)
@given(arrays(np.float64, (3, 6), elements=st.floats(-5.0, 5.0, allow_nan=False)))
def test_phase_sync_closed_loop(X):
    orbit = ReferenceOrbit.from_altitude(500e3)
    p, m = 3, 500.0
    g = GainSet(1.0, 1.0, 1.0, k1=20.0, k2=5.0, lam=2.0)
    spiral = SpiralReference(5.0, 2 * math.pi / 500)
    spec = ReferenceSpec(translation=spiral)
    states = [TransState(X[i, :3], X[i, 3:] / 10) for i in range(p)]
    refs = [reference_eval(spec, i, 12.0, "translation", p) for i in range(p)]
    ss = [composite_vars(s.r, s.r_dot, *r, np.full(3, 2.0))[2] for s, r in zip(states, refs)]
    for i in range(p):
        F = phase_sync_control(i, states, refs, g, p, orbit, m)
        rdd = relative_rhs(orbit, states[i].r, states[i].r_dot, F, np.zeros(3), m)
        qr_ddot = composite_vars(states[i].r, states[i].r_dot, *refs[i], np.full(3, 2.0))[1]
        M, C, D, gv = lagrangian_form(orbit, m, states[i].r)
        coup = sum(
            5.0 * ring_rotation(2 * math.pi * (i - j) / p) @ ss[j] for j in range(p) if j != i
        )
        res = M @ (rdd - qr_ddot) + C @ ss[i] + 20.0 * ss[i] - coup
        assert np.allclose(res, 0.0, atol=1e-8)


def test_references_are_consistent_derivatives():
    h = 1e-5
    for f in (
        SinusoidChannel(0.3, 0.02, 0.4, 0.1),
        AttitudeReference(rotation_rate=0.01, rotation_phase=0.3),
        SpiralReference(5.0, 0.0126, 1e-4, 1.0, 0.5, 0.01, 0.2, "sin_x"),
    ):
        p0, v0, a0 = f(10.0)
        pp, vp, _ = f(10.0 + h)
        pm, vm, _ = f(10.0 - h)
        assert np.allclose((np.asarray(pp) - pm) / (2 * h), v0, atol=1e-8)
        assert np.allclose((np.asarray(vp) - vm) / (2 * h), a0, atol=1e-8)


def test_spiral_conventions_and_offsets():
    a = SpiralReference(5.0, 0.1, convention="cos_x")(0.0)[0]
    b = SpiralReference(5.0, 0.1, convention="sin_x")(0.0)[0]
    assert np.allclose(a, [5.0, 0.0, 0.0]) and np.allclose(b, [0.0, 0.0, 5.0])
    spec = ReferenceSpec(translation=SpiralReference(5.0, 0.1))
    pos1 = reference_eval(spec, 1, 0.0, "translation", 2)[0]
    assert np.allclose(pos1, [-5.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        SpiralReference(5.0, 0.0)
    with pytest.raises(ValueError):
        reference_eval(spec, 0, -1.0, "translation", 2)
    with pytest.raises(ValueError):
        reference_eval(spec, 0, 1.0, "attitude")
    with pytest.raises(ValueError):
        AttitudeReference(rotation_rate=1.0).coefficients()


def test_ring_weights_and_checks():
    assert np.array_equal(ring_weights(2), [[0, 1], [1, 0]])
    W = ring_weights(4, directed=True)
    assert np.all(W.sum(axis=1) == 1) and np.all(W.sum(axis=0) == 1)
    assert np.all(ring_weights(5).sum(axis=1) == 2)
    states, refs = _setup(2, np.zeros((3, 3)))
    with pytest.raises(GraphMismatchError):
        attitude_sync_control(0, states, refs, GAINS, BODY, weights=np.eye(2))
    with pytest.raises(GraphMismatchError):
        attitude_sync_control(0, states, refs[:1], GAINS, BODY)


def test_gain_validation():
    assert np.array_equal(as_diag(np.diag([1.0, 2.0, 3.0])), [1, 2, 3])
    with pytest.raises(ValueError):
        as_diag(np.ones((3, 3)))
    with pytest.raises(ValueError):
        GainSet(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        GainSet(1.0, -1.0, 1.0)
    with pytest.raises(ValueError):
        GainSet(1.0, 1.0, 1.0, k1=-2.0)
    with pytest.raises(ValueError):
        AdaptiveState(np.zeros(6), -1.0)
    assert GainSet(1.0, 1.0, 1.0, mass_scale=(0.5, 1.5)).scale_for(1) == 1.5
