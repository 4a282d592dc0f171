import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from formsync.attitude import AttitudeState, SpacecraftBody, generalized_torque, lagrangian_matrices
from formsync.errors import (
    DimensionMismatchError,
    NonSymmetricError,
    NotContractingError,
    UnsupportedTopologyError,
)
from formsync.network import (
    attitude_metric_bounds,
    build_coupling_matrix,
    check_conditions,
    disturbance_ball,
    envelope_samples,
    helmert_complement,
    phase_rotations,
    ring_spectrum,
    spectral_analysis,
    sync_error,
    weighted_attitude_disturbance,
)

J = np.array([[150.0, 0.0, -100.0], [0.0, 270.0, 0.0], [-100.0, 0.0, 300.0]])


def test_ring_structure():
    L = build_coupling_matrix(3, 300.0, 100.0)
    assert np.allclose(L.L.block(0, 0), 300 * np.eye(3))
    assert np.allclose(L.L.block(0, 1), -100 * np.eye(3))
    assert np.allclose(L.L.block(0, 2), -100 * np.eye(3))
    assert not L.directed
    # block rows sum to K1 - 2 K2
    assert np.allclose(L.matrix @ np.ones(9), 100.0)


@settings(max_examples=40)
@given(st.integers(2, 8), st.floats(1.0, 500.0), st.floats(0.0, 300.0))
def test_ring_spectrum_matches_eigensolve(p, K1, K2):
    L = build_coupling_matrix(p, K1, K2)
    w = np.linalg.eigvalsh(L.matrix)
    assert np.allclose(np.repeat(ring_spectrum(p, K1, K2), 3), w, atol=1e-9 * max(K1, 1.0))


@given(st.integers(2, 7))
def test_helmert_basis(p):
    H = helmert_complement(p)
    assert np.allclose(H.T @ H, np.eye(p - 1))
    assert np.allclose(np.ones(p) @ H, 0.0)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_spectral_split_reconstructs(p):
    L = build_coupling_matrix(p, np.array([300.0, 250.0, 200.0]), np.array([100.0, 50.0, 80.0]))
    b = spectral_analysis(L)
    assert np.allclose(b.reconstruct(), L.matrix, atol=1e-10)
    assert np.allclose(b.V.T @ b.V, np.eye(3 * p), atol=1e-12)
    assert np.allclose(b.V_sync.T @ L.matrix @ b.V_sync, b.D2, atol=1e-10)


def test_spectral_split_rejects_directed():
    with pytest.raises(NonSymmetricError):
        spectral_analysis(build_coupling_matrix(3, 300.0, 100.0, "directed_ring"))


def test_conditions():
    rep = check_conditions(build_coupling_matrix(2, 300.0, 100.0), 20.0)
    assert rep.all_ok and rep.D1_max == pytest.approx(200) and rep.D2_min == pytest.approx(400)
    L = build_coupling_matrix(2, 300.0, 100.0)
    S = np.sqrt(20.0) * np.eye(6)
    assert rep.alpha_max == pytest.approx(4 * np.linalg.eigvalsh(S @ L.matrix @ S)[0])
    semi = check_conditions(build_coupling_matrix(3, 200.0, 100.0), 20.0)
    assert semi.semidefinite and not semi.tracking_ok and semi.sync_ok
    bad = check_conditions(build_coupling_matrix(2, 100.0, 300.0), 20.0)
    assert not bad.tracking_ok and bad.alpha_max == 0.0
    # no coupling: both modes share one rate
    slow = check_conditions(build_coupling_matrix(3, 300.0, 0.0), 1.0)
    assert slow.tracking_ok and not slow.timescale_ok
    d = check_conditions(build_coupling_matrix(4, 300.0, 100.0, "directed_ring"), 1.0)
    assert d.directed and d.notes
    with pytest.raises(DimensionMismatchError):
        check_conditions(build_coupling_matrix(2, 300.0, 100.0), 1.0, p=3)


def test_topology_validation():
    with pytest.raises(UnsupportedTopologyError):
        build_coupling_matrix(3, 1.0, 1.0, np.array([[0, 1, 1], [1, 0, 0], [1, 0, 0]]))
    with pytest.raises(UnsupportedTopologyError):
        build_coupling_matrix(3, 1.0, 1.0, "star")
    with pytest.raises(UnsupportedTopologyError):
        build_coupling_matrix(1, 1.0, 1.0)
    with pytest.raises(DimensionMismatchError):
        build_coupling_matrix(3, 1.0, 1.0, np.zeros((2, 2)))


def test_sync_error():
    b = spectral_analysis(build_coupling_matrix(3, 300.0, 100.0))
    x = np.tile([0.1, -0.2, 0.3], (3, 1))
    sync, common = sync_error(x, b)
    assert sync < 1e-14 and common == pytest.approx(math.sqrt(3) * np.linalg.norm(x[0]))
    rots = phase_rotations(3)
    shifted = np.stack([R @ x[0] for R in rots])
    assert sync_error(shifted, b, rots)[0] < 1e-14
    assert sync_error(shifted, b)[0] > 1e-3
    with pytest.raises(DimensionMismatchError):
        sync_error(np.zeros(4), b)


def test_envelope_and_metric_bounds():
    pts = envelope_samples(1024, 0.5)
    assert pts.shape == (1024, 3)
    r = np.linalg.norm(pts, axis=1)
    assert r.max() <= 0.5 + 1e-12 and np.isclose(r.max(), 0.5)
    assert np.array_equal(pts, envelope_samples(1024, 0.5))
    lo, hi = attitude_metric_bounds([SpacecraftBody(J)], np.zeros((1, 3)))
    assert lo == pytest.approx(16 * 100) and hi == pytest.approx(16 * 350)
    with pytest.raises(ValueError):
        envelope_samples(8, 100.0)


def test_weighted_disturbance_is_attitude_free():
    body = SpacecraftBody(J)
    d = np.array([0.1, -0.05, 0.2])
    for q in ([0, 0, 0], [0.3, -0.2, 0.1], [0.9, 0.1, 0.0]):
        st_ = AttitudeState(q, np.zeros(3))
        tau = generalized_torque(st_, d)
        M, _ = lagrangian_matrices(body, st_)
        assert weighted_attitude_disturbance([body], d) == pytest.approx(math.sqrt(tau @ np.linalg.solve(M, tau)))


def test_disturbance_ball():
    L = build_coupling_matrix(2, 300.0, 100.0)
    rb = disturbance_ball(L, 50.0, 0.2, (1000.0, 5000.0))
    assert rb.lambda_max == pytest.approx(150.0 / 5000.0)
    assert rb.R_bound == pytest.approx(0.2 / math.sqrt(1000.0) / rb.lambda_max)
    with pytest.raises(NotContractingError):
        disturbance_ball(L, 250.0, 0.2, (1000.0, 5000.0))
    with pytest.raises(ValueError):
        disturbance_ball(L, 0.0, 0.2, (0.0, 1.0))
