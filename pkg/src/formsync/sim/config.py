"""Scenario configuration: dataclasses plus a YAML loader.

Field names in scenario files match the dataclass attributes below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from ..attitude import SpacecraftBody
from ..control import (
    AttitudeReference,
    GainSet,
    PartialCouplingMask,
    ReferenceSpec,
    SinusoidChannel,
    SpiralReference,
)
from ..errors import ConfigInvalidError
from ..orbital import EARTH_RADIUS, ReferenceOrbit

PLANTS = ("attitude", "translation", "combined")
CONTROLLERS = ("nonlinear_sync", "pd", "adaptive", "partial", "phase_sync")
BUNDLED = ("two_sc_attitude", "two_sc_pd", "four_sc_hetero", "two_sc_j2_spiral")


@dataclass(frozen=True)
class SpacecraftModel:
    inertia: np.ndarray
    mass: float = 1.0
    wheel_momentum: np.ndarray = field(default_factory=lambda: np.zeros(3))
    torque_limit: float | None = None
    q0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    omega0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    r0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    v0: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @property
    def body(self) -> SpacecraftBody:
        return SpacecraftBody(self.inertia, self.wheel_momentum, self.torque_limit)


@dataclass(frozen=True)
class AdaptiveSpec:
    initial_scale: float = 1.0
    gamma: np.ndarray = field(default_factory=lambda: np.full(6, 100.0))


@dataclass(frozen=True)
class FormationSpec:
    controller: str
    gains: GainSet | None = None
    topology: Any = "ring"
    mask: PartialCouplingMask | None = None
    delays: np.ndarray | None = None
    k_wave: float = 1.0
    adaptive: AdaptiveSpec | None = None
    # translational phase synchronization for combined plants
    translation_gains: GainSet | None = None
    mass_normalize: bool = True


@dataclass(frozen=True)
class OrbitSpec:
    orbit: ReferenceOrbit
    inclination: float = math.pi / 2
    phase0: float = 0.0


@dataclass(frozen=True)
class DisturbanceSpec:
    j2: bool = False
    torque: np.ndarray | None = None  # (p, 3) body-frame N m
    force: np.ndarray | None = None  # (p, 3) orbital-frame N
    vanishing_gamma: float = 0.0
    vanishing_direction: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    envelope_radius: float = 0.5  # MRP ball used for inertia-metric bounds


@dataclass(frozen=True)
class IntegratorSpec:
    dt: float
    t_final: float
    sampled_data: bool = False


@dataclass(frozen=True)
class OutputSpec:
    path: str | None = None
    decimation: int = 1


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    plant: str
    craft: tuple[SpacecraftModel, ...]
    formation: FormationSpec
    reference: ReferenceSpec
    integrator: IntegratorSpec
    orbit: OrbitSpec | None = None
    disturbance: DisturbanceSpec = field(default_factory=DisturbanceSpec)
    output: OutputSpec = field(default_factory=OutputSpec)

    @property
    def p(self) -> int:
        return len(self.craft)

    @property
    def has_attitude(self) -> bool:
        return self.plant in ("attitude", "combined")

    @property
    def has_translation(self) -> bool:
        return self.plant in ("translation", "combined")

    @property
    def attitude_gains(self) -> GainSet:
        return self.formation.gains

    @property
    def trans_gains(self) -> GainSet:
        if self.plant == "combined":
            return self.formation.translation_gains
        return self.formation.gains

    def with_integrator(self, dt: float | None = None, t_final: float | None = None) -> "ScenarioConfig":
        integ = replace(
            self.integrator,
            dt=self.integrator.dt if dt is None else dt,
            t_final=self.integrator.t_final if t_final is None else t_final,
        )
        cfg = replace(self, integrator=integ)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        p = self.p
        if self.plant not in PLANTS:
            raise ConfigInvalidError(f"plant must be one of {PLANTS}")
        if p < 1:
            raise ConfigInvalidError("at least one craft is required")
        ctrl = self.formation.controller
        if ctrl not in CONTROLLERS:
            raise ConfigInvalidError(f"controller must be one of {CONTROLLERS}")
        dt, tf = self.integrator.dt, self.integrator.t_final
        if not (dt > 0.0 and tf > dt):
            raise ConfigInvalidError("need dt > 0 and t_final > dt")
        if self.output.decimation < 1:
            raise ConfigInvalidError("decimation must be >= 1")
        if self.formation.gains is None:
            raise ConfigInvalidError("formation.gains is required")
        if self.plant == "translation" and ctrl != "phase_sync":
            raise ConfigInvalidError("translation plants use the phase_sync controller")
        if self.plant != "translation" and ctrl == "phase_sync":
            raise ConfigInvalidError("phase_sync drives positions; choose an attitude controller")
        if self.has_attitude and self.reference.attitude is None and self.reference.sources is None:
            raise ConfigInvalidError("attitude plant needs reference.attitude")
        if self.has_translation:
            if self.orbit is None:
                raise ConfigInvalidError("translational plants need an orbit")
            if self.reference.translation is None:
                raise ConfigInvalidError("translational plants need reference.translation")
            g = self.trans_gains
            if g is None or g.k1 is None or g.k2 is None or g.lam is None:
                raise ConfigInvalidError("translational gains k1, k2, lam are required")
            if any(not c.mass > 0.0 for c in self.craft):
                raise ConfigInvalidError("craft masses must be positive")
        if ctrl == "pd" and p != 2:
            raise ConfigInvalidError("the PD baseline is defined for two craft")
        if ctrl == "partial" and self.formation.mask is None:
            raise ConfigInvalidError("partial coupling needs formation.mask")
        if ctrl == "adaptive" and self.formation.adaptive is None:
            raise ConfigInvalidError("adaptive controller needs formation.adaptive")
        if self.formation.delays is not None:
            D = self.formation.delays
            if D.shape != (p, p) or np.any(D < 0.0):
                raise ConfigInvalidError("delays must be a non-negative p x p matrix")
            if ctrl == "pd":
                raise ConfigInvalidError("delayed coupling is defined for the composite-variable laws")
            if self.plant != "attitude":
                raise ConfigInvalidError("delayed coupling is supported for attitude plants")
        src = self.reference.sources
        if src is not None:
            if len(src) != p:
                raise ConfigInvalidError("reference.sources needs one entry per craft")
            for i, s in enumerate(src):
                if s is not None and not (0 <= s < p and s != i):
                    raise ConfigInvalidError(f"invalid reference source {s} for craft {i}")
            _source_order(src)
            if self.has_translation:
                raise ConfigInvalidError("reference sources are supported for attitude only")
        for name, arr in (("torque", self.disturbance.torque), ("force", self.disturbance.force)):
            if arr is not None and arr.shape != (p, 3):
                raise ConfigInvalidError(f"disturbance.{name} must be p x 3")
        if self.disturbance.vanishing_gamma < 0.0:
            raise ConfigInvalidError("vanishing_gamma must be non-negative")
        tp = self.formation.topology
        if not isinstance(tp, str) and np.asarray(tp).shape != (p, p):
            raise ConfigInvalidError("topology weights must be p x p")


def _source_order(sources) -> list[int]:
    """Craft indices ordered so every reference source comes before its users."""
    p = len(sources)
    order, state = [], [0] * p

    def visit(i):
        if state[i] == 1:
            raise ConfigInvalidError("reference sources form a cycle")
        if state[i] == 2:
            return
        state[i] = 1
        if sources[i] is not None:
            visit(sources[i])
        state[i] = 2
        order.append(i)

    for i in range(p):
        visit(i)
    return order


source_order = _source_order


# ---------------------------------------------------------------------------
# parsing

def _vec(x, n=3, name="vector") -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        a = np.full(n, float(a))
    if a.shape != (n,):
        raise ConfigInvalidError(f"{name} must have {n} entries")
    return a


def _get(d: dict, key: str, default=None, required=False):
    if key in d:
        return d[key]
    if required:
        raise ConfigInvalidError(f"missing required field {key!r}")
    return default


def _angle(d: dict, key: str, default: float = 0.0) -> float:
    """Read ``key`` (radians) or ``key_deg`` (degrees)."""
    if key + "_deg" in d:
        return math.radians(float(d[key + "_deg"]))
    return float(d.get(key, default))


def _gains(d: dict | None) -> GainSet | None:
    if d is None:
        return None
    try:
        return GainSet(
            K1=_vec(_get(d, "K1", 1.0), name="K1"),
            K2=_vec(_get(d, "K2", 0.0), name="K2"),
            Lambda=_vec(_get(d, "Lambda", 1.0), name="Lambda"),
            k1=_get(d, "k1"),
            k2=_get(d, "k2"),
            lam=_get(d, "lam"),
        )
    except ValueError as exc:
        raise ConfigInvalidError(str(exc)) from exc


def _craft(d: dict) -> SpacecraftModel:
    J = np.asarray(_get(d, "inertia", required=True), dtype=float)
    m = SpacecraftModel(
        inertia=J,
        mass=float(_get(d, "mass", 1.0)),
        wheel_momentum=_vec(_get(d, "wheel_momentum", 0.0), name="wheel_momentum"),
        torque_limit=_get(d, "torque_limit"),
        q0=_vec(_get(d, "q0", 0.0), name="q0"),
        omega0=_vec(_get(d, "omega0", 0.0), name="omega0"),
        r0=_vec(_get(d, "r0", 0.0), name="r0"),
        v0=_vec(_get(d, "v0", 0.0), name="v0"),
    )
    try:
        m.body
    except ValueError as exc:
        raise ConfigInvalidError(str(exc)) from exc
    return m


def _reference(d: dict | None, p: int) -> ReferenceSpec:
    d = d or {}
    att = None
    if d.get("attitude") is not None:
        a = d["attitude"]
        chans = a.get("channels", [{}, {}, {}])
        if len(chans) != 3:
            raise ConfigInvalidError("reference.attitude.channels needs three entries")
        channels = tuple(
            SinusoidChannel(
                amplitude=float(c.get("amplitude", 0.0)),
                freq_hz=float(c.get("freq_hz", 0.0)),
                phase=_angle(c, "phase"),
                bias=float(c.get("bias", 0.0)),
            )
            for c in chans
        )
        rate = a.get("rotation_rate")
        att = AttitudeReference(
            channels,
            rotation_rate=None if rate is None else float(rate),
            rotation_axis=int(a.get("rotation_axis", 2)),
            rotation_phase=_angle(a, "rotation_phase"),
        )
        if a.get("synchronized_rotation"):
            att = replace(att, rotation_rate=float("nan"))  # resolved below
    tr = None
    if d.get("translation") is not None:
        t = d["translation"]
        om = t.get("omega")
        if om is None and "period" in t:
            om = 2.0 * math.pi / float(t["period"])
        try:
            tr = SpiralReference(
                a0=float(_get(t, "a0", required=True)),
                omega=float(om),
                a_rate=float(t.get("a_rate", 0.0)),
                y_bias=float(t.get("y_bias", 0.0)),
                y_amp=float(t.get("y_amp", 0.0)),
                y_freq=float(t.get("y_freq", 0.0)),
                y_phase=_angle(t, "y_phase"),
                convention=str(t.get("convention", "cos_x")),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigInvalidError(f"reference.translation: {exc}") from exc
    if att is not None and att.rotation_rate is not None and math.isnan(att.rotation_rate):
        if tr is None:
            raise ConfigInvalidError("synchronized_rotation needs a translation reference")
        att = replace(att, rotation_rate=tr.omega)
    sources = d.get("sources")
    offs = d.get("phase_offsets_deg")
    if offs is not None:
        offs = tuple(math.radians(float(v)) for v in offs)
    elif d.get("phase_offsets") is not None:
        offs = tuple(float(v) for v in d["phase_offsets"])
    if offs is not None and len(offs) != p:
        raise ConfigInvalidError("phase_offsets needs one entry per craft")
    return ReferenceSpec(
        attitude=att,
        translation=tr,
        sources=None if sources is None else tuple(None if s is None else int(s) for s in sources),
        phase_offsets=offs,
    )


def config_from_dict(d: dict, name: str | None = None) -> ScenarioConfig:
    if not isinstance(d, dict):
        raise ConfigInvalidError("scenario must be a mapping")
    craft = tuple(_craft(c) for c in _get(d, "craft", required=True))
    p = len(craft)
    f = _get(d, "formation", required=True)
    ad = f.get("adaptive")
    adaptive = None
    if ad is not None:
        g = np.asarray(ad.get("gamma", 100.0), dtype=float)
        adaptive = AdaptiveSpec(float(ad.get("initial_scale", 1.0)), np.broadcast_to(g, (6,)).copy() if g.ndim < 2 else g)
    mask = f.get("mask")
    delays = f.get("delays")
    topo = f.get("topology", "ring")
    formation = FormationSpec(
        controller=str(_get(f, "controller", required=True)),
        gains=_gains(f.get("gains")),
        topology=topo if isinstance(topo, str) else np.asarray(topo, dtype=float),
        mask=None if mask is None else PartialCouplingMask(_vec(mask, name="mask")),
        delays=None if delays is None else np.asarray(delays, dtype=float),
        k_wave=float(f.get("k_wave", 1.0)),
        adaptive=adaptive,
        translation_gains=_gains(f.get("translation_gains")),
        mass_normalize=bool(f.get("mass_normalize", True)),
    )
    orbit = None
    if d.get("orbit") is not None:
        o = d["orbit"]
        try:
            if "R0" in o:
                ref = ReferenceOrbit(float(o["R0"]))
            else:
                ref = ReferenceOrbit(EARTH_RADIUS + float(_get(o, "altitude", required=True)))
        except ValueError as exc:
            raise ConfigInvalidError(str(exc)) from exc
        orbit = OrbitSpec(ref, _angle(o, "inclination", math.pi / 2), _angle(o, "phase0"))
    dist = d.get("disturbance") or {}

    def _pmat(key):
        v = dist.get(key)
        if v is None:
            return None
        a = np.asarray(v, dtype=float)
        if a.ndim == 1:
            a = np.tile(a, (p, 1))
        return a

    disturbance = DisturbanceSpec(
        j2=bool(dist.get("j2", False)),
        torque=_pmat("torque"),
        force=_pmat("force"),
        vanishing_gamma=float(dist.get("vanishing_gamma", 0.0)),
        vanishing_direction=_vec(dist.get("vanishing_direction", [1.0, 0.0, 0.0]), name="vanishing_direction"),
        envelope_radius=float(dist.get("envelope_radius", 0.5)),
    )
    integ = _get(d, "integrator", required=True)
    plant = str(_get(d, "plant", required=True))
    default_dt = 1e-3 if plant == "attitude" else 1e-2
    integrator = IntegratorSpec(
        dt=float(integ.get("dt", default_dt)),
        t_final=float(_get(integ, "t_final", required=True)),
        sampled_data=bool(integ.get("sampled_data", False)),
    )
    out = d.get("output") or {}
    output = OutputSpec(path=out.get("path"), decimation=int(out.get("decimation", 1)))
    cfg = ScenarioConfig(
        name=str(d.get("name", name or "scenario")),
        plant=plant,
        craft=craft,
        formation=formation,
        reference=_reference(d.get("reference"), p),
        integrator=integrator,
        orbit=orbit,
        disturbance=disturbance,
        output=output,
    )
    cfg.validate()
    return cfg


def load_scenario(path_or_name) -> ScenarioConfig:
    """Load a YAML scenario file, or a bundled fixture by name."""
    text = None
    p = Path(path_or_name)
    if p.is_file():
        text = p.read_text()
        name = p.stem
    else:
        name = str(path_or_name)
        res = resources.files("formsync.scenarios").joinpath(f"{name}.yaml")
        if not res.is_file():
            raise ConfigInvalidError(f"no scenario file or bundled fixture named {path_or_name!r}")
        text = res.read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigInvalidError(f"cannot parse scenario: {exc}") from exc
    return config_from_dict(data, name)


def bundled_scenarios() -> list[str]:
    root = resources.files("formsync.scenarios")
    return sorted(r.name[:-5] for r in root.iterdir() if r.name.endswith(".yaml"))
