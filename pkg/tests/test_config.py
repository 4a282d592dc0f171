import math

import numpy as np
import pytest
import yaml

from _support import fixture_dict
from formsync.errors import ConfigInvalidError
from formsync.sim import bundled_scenarios, config_from_dict, load_scenario
from formsync.sim.config import BUNDLED


def test_all_bundled_load():
    names = bundled_scenarios()
    assert set(BUNDLED) <= set(names)
    for n in names:
        cfg = load_scenario(n)
        assert cfg.name == n


def test_load_from_path(tmp_path):
    p = tmp_path / "mine.yaml"
    d = fixture_dict("two_sc_attitude")
    d.pop("name")
    p.write_text(yaml.safe_dump(d))
    assert load_scenario(p).name == "mine"


def test_spiral_fixture_parameters():
    cfg = load_scenario("two_sc_j2_spiral")
    tr = cfg.reference.translation
    assert tr.omega == pytest.approx(2 * math.pi / 500)
    assert tr.a0 == 5.0 and tr.a_rate == 1e-4
    assert cfg.orbit.orbit.R0 == pytest.approx(6378.137e3 + 500e3)
    assert cfg.disturbance.j2
    assert [c.mass for c in cfg.craft] == [500.0, 500.0]
    g = cfg.trans_gains
    assert (g.k1, g.k2, g.lam) == (10.0, 5.0, 2.0)
    assert np.allclose(cfg.attitude_gains.K1, 30.0)


def test_with_integrator_overrides():
    cfg = load_scenario("two_sc_attitude").with_integrator(dt=0.01, t_final=2.0)
    assert cfg.integrator.dt == 0.01 and cfg.integrator.t_final == 2.0
    with pytest.raises(ConfigInvalidError):
        load_scenario("two_sc_attitude").with_integrator(dt=-1.0)


def _bad(mutator):
    d = fixture_dict("two_sc_attitude")
    mutator(d)
    with pytest.raises(ConfigInvalidError):
        config_from_dict(d)


@pytest.mark.parametrize(
    "mutator",
    [
        lambda d: d.update(plant="fluid"),
        lambda d: d["formation"].update(controller="magic"),
        lambda d: d["integrator"].update(dt=0.0),
        lambda d: d["output"].update(decimation=0),
        lambda d: d.pop("reference"),
        lambda d: d.pop("integrator"),
        lambda d: d["craft"][0].update(inertia=[[1, 2, 0], [0, 1, 0], [0, 0, 1]]),
        lambda d: d["formation"].update(controller="partial"),
        lambda d: d["formation"].update(controller="adaptive"),
        lambda d: d["formation"].update(delays=[[0, -1], [0, 0]]),
        lambda d: d["formation"].update(topology=[[0, 1, 0], [1, 0, 1], [0, 1, 0]]),
        lambda d: d.update(disturbance={"torque": [[1, 2, 3]] * 3}),
        lambda d: d["reference"].update(sources=[1, 0]),
        lambda d: d["reference"]["attitude"].update(channels=[{}, {}]),
        lambda d: d.update(craft=d["craft"] * 2) or d["formation"].update(controller="pd"),
    ],
)
def test_invalid_configs(mutator):
    _bad(mutator)


def test_translation_requires_orbit():
    d = fixture_dict("three_sc_circle")
    d.pop("orbit")
    with pytest.raises(ConfigInvalidError):
        config_from_dict(d)


def test_unknown_fixture():
    with pytest.raises(ConfigInvalidError):
        load_scenario("no_such_fixture")


def test_angles_in_degrees_and_period():
    d = fixture_dict("two_sc_attitude")
    d["reference"]["attitude"]["channels"][0]["phase_deg"] = 90
    cfg = config_from_dict(d)
    assert cfg.reference.attitude.channels[0].phase == pytest.approx(math.pi / 2)
