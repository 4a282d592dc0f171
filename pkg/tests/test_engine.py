import os
import subprocess
import sys

import numpy as np
import pytest

from _support import fixture_dict
from formsync import kernels
from formsync.errors import SingularityGuardError
from formsync.sim import config_from_dict, integrate

FAST = ["two_sc_attitude", "two_sc_pd", "four_sc_hetero", "two_sc_j2_spiral", "three_sc_circle", "two_sc_partial"]
compiled = pytest.mark.skipif(kernels.BACKEND != "compiled", reason="compiled kernels not built")


def _short(name, t_final=2.0, **extra):
    d = fixture_dict(name)
    d["integrator"]["t_final"] = t_final
    d["output"]["decimation"] = 1 if d["integrator"].get("dt", 0.01) >= 0.01 else 10
    d.update(extra)
    return config_from_dict(d)


def _states(log):
    return [a for a in (log.q, log.u, log.r, log.F) if a is not None]


@compiled
@pytest.mark.parametrize("name", FAST)
def test_compiled_matches_python(name):
    cfg = _short(name)
    a = integrate(cfg, backend="compiled")
    b = integrate(cfg, backend="python")
    assert a.backend == "compiled" and b.backend == "python"
    for x, y in zip(_states(a), _states(b)):
        assert np.allclose(x, y, rtol=1e-13, atol=1e-15)


@pytest.mark.parametrize("name", FAST)
def test_kernels_match_generic(name):
    cfg = _short(name)
    a = integrate(cfg)
    b = integrate(cfg, engine="generic")
    assert b.backend == "generic"
    for x, y in zip(_states(a), _states(b)):
        assert np.abs(x - y).max() <= 1e-10 * max(1.0, np.abs(y).max())


def test_kernels_match_generic_with_disturbance_and_saturation():
    d = fixture_dict("two_sc_attitude")
    d["integrator"]["t_final"] = 2.0
    d["disturbance"] = {"torque": [[0.1, 0.0, -0.2], [0.0, 0.3, 0.0]]}
    for c in d["craft"]:
        c["torque_limit"] = 6.0
        c["wheel_momentum"] = [1.0, 0.0, -2.0]
    cfg = config_from_dict(d)
    a, b = integrate(cfg), integrate(cfg, engine="generic")
    assert np.abs(a.q - b.q).max() < 1e-12
    assert np.abs(a.u).max() <= 6.0


def test_pure_python_env_switch():
    env = dict(os.environ, FORMSYNC_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from formsync import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_log_grid():
    cfg = _short("two_sc_attitude", t_final=1.234)
    log = integrate(cfg)
    assert log.t[0] == 0.0 and log.t[-1] == pytest.approx(1.234)
    assert log.q.shape == (log.t.size, 2, 3)


def test_sampled_data_close_to_continuous():
    d = fixture_dict("two_sc_attitude")
    d["integrator"].update(t_final=3.0, sampled_data=True)
    held = integrate(config_from_dict(d))
    d["integrator"]["sampled_data"] = False
    cont = integrate(config_from_dict(d))
    assert held.backend == "generic"
    diff = np.abs(held.q - cont.q).max()
    assert 0.0 < diff < 1e-3


def test_leader_follower_sources():
    d = fixture_dict("two_sc_attitude")
    d["integrator"]["t_final"] = 20.0
    d["reference"]["sources"] = [None, 0]
    log = integrate(config_from_dict(d))
    gap = np.linalg.norm(log.q[:, 0] - log.q[:, 1], axis=1)
    assert gap[-1] < 0.2 * gap[0]


def test_vanishing_disturbance_still_converges():
    d = fixture_dict("two_sc_attitude")
    d["integrator"]["t_final"] = 20.0
    d["disturbance"] = {"vanishing_gamma": 50.0, "vanishing_direction": [0, 1, 0]}
    cfg = config_from_dict(d)
    log = integrate(cfg)
    assert log.reports["attitude"].robustness.R_bound == 0.0
    assert log.sync_norm[-1] < 0.2 * log.sync_norm[0]


def test_adaptive_logs_estimates():
    d = fixture_dict("two_sc_adaptive")
    d["integrator"]["t_final"] = 0.5
    log = integrate(config_from_dict(d))
    assert log.a_hat.shape == (log.t.size, 2, 6)
    assert np.allclose(log.a_hat[0, 0], 0.7 * np.array([150, 270, 300, 0, -100, 0]))


@pytest.mark.parametrize("engine", ["auto", "generic"])
def test_guard_violation_raises(engine):
    d = fixture_dict("two_sc_attitude")
    d["integrator"]["t_final"] = 20.0
    d["formation"]["gains"] = {"K1": 1e-3, "K2": 0.0, "Lambda": 1e-3}
    d["reference"]["attitude"]["channels"] = [{}, {}, {}]
    # pure spin about a principal axis runs straight into the 360 deg point
    d["craft"][0]["inertia"] = [[100, 0, 0], [0, 200, 0], [0, 0, 300]]
    d["craft"][0]["q0"] = [0.0, 0.0, 0.0]
    d["craft"][0]["omega0"] = [0.0, 0.0, 3.0]
    with pytest.raises(SingularityGuardError):
        integrate(config_from_dict(d), engine=engine)


@pytest.mark.slow
def test_long_delays_stay_bounded_and_decay():
    d = fixture_dict("two_sc_delay")
    d["formation"]["delays"] = [[0.0, 2.0], [1.3, 0.0]]
    d["integrator"].update(dt=0.01, t_final=150.0)
    d["output"]["decimation"] = 10
    log = integrate(config_from_dict(d))
    sn = np.linalg.norm(log.s, axis=2)
    assert np.all(np.isfinite(sn))
    assert sn[-1].max() < 1e-3 * sn.max()
