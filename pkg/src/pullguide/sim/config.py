"""Scenario configuration: typed parameter blocks, JSON schema, loading."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import jsonschema


class ScenarioError(ValueError):
    """Scenario file missing, malformed or failing validation."""


@dataclass
class HumanParams:
    K_arm: float = 200.0
    preferred_speed: float = 1.2
    pursuit_gain: float = 4.0
    velocity_tau: float = 0.15
    max_speed: float = 1.6
    stance_half_width: float = 0.12
    gait_amplitude: float = 0.12
    stride_length: float = 1.2
    shoulder_offset: tuple = (0.1, -0.2)
    hand_offset: tuple = (0.5, 0.2)
    # {"kind": "profile"} derives the drift from the run seed
    drift: dict = field(default_factory=lambda: {"kind": "none"})


@dataclass
class ImpedanceParams:
    k_x: float = 1000.0
    k_z: float = 500.0
    damping_ratio: float = 0.7
    k_yaw: float = 30.0
    eps_motion: float = 5e-5


@dataclass
class AdmittanceBlock:
    M: tuple = (10.0, 10.0, 5.0)
    D: tuple = (80.0, 80.0, 40.0)
    limits: tuple = (1.2, 1.2, 1.0)


@dataclass
class PullingBlock:
    d_stop: float = 0.5
    eta: float = 1000.0
    zeta_l: float = 0.0
    gamma: float = 0.15
    kappa: float = 40.0
    y_filter_tau: float = 0.2


@dataclass
class GuidanceBlock:
    D1: float = 0.6
    D2: float = 0.8
    D3: float = 0.6
    hand_height: float = 1.0
    laser_height: float = 0.2
    F_des: tuple = (80.0, 80.0, 40.0)
    negate_yaw: bool = True
    waypoint_spacing: float = 0.3
    replan_period: float = 0.5


@dataclass
class PerceptionBlock:
    angle_window_deg: tuple = (-70.0, 70.0)
    distance_window: tuple = (0.2, 2.5)
    eps: float = 0.08
    min_pts: int = 3
    coherence: float = 0.2
    stale_after: float = 0.5
    max_leg_width: float = 0.3
    leg_gap: tuple = (0.05, 0.7)
    tracking_grace: float = 0.3


@dataclass
class LaserBlock:
    # sensor pose in the base frame: rear-mounted, looking backward
    mount: tuple = (-0.3, 0.0, math.pi)
    angle_min: float = -math.pi / 2
    angle_max: float = math.pi / 2
    n_beams: int = 720
    max_range: float = 8.0
    noise_sigma: float = 0.01
    leg_radius: float = 0.06
    scan_every: int = 5


@dataclass
class SimBlock:
    dt: float = 0.01
    max_time: float = 60.0
    seed: int = 1
    adaptive: bool = True
    footprint_half_width: float = 0.35
    goal_tolerance: float = 0.15
    ext_gain: float = 1.0
    collision_inflation: float = 0.4
    planner_margin: float = 0.45
    history_capacity: int = 10_000
    history_min_spacing: float = 0.005
    max_ee_displacement: float = 0.4
    reach: float = 1.0


@dataclass
class WorldBlock:
    bounds: tuple | None = None
    resolution: float = 0.05
    segments: list = field(default_factory=list)
    discs: list = field(default_factory=list)
    moving_discs: list = field(default_factory=list)
    grid_file: str | None = None


@dataclass
class Scenario:
    name: str
    start: tuple
    goal: tuple
    world: WorldBlock = field(default_factory=WorldBlock)
    path: list | None = None
    human: HumanParams = field(default_factory=HumanParams)
    impedance: ImpedanceParams = field(default_factory=ImpedanceParams)
    admittance: AdmittanceBlock = field(default_factory=AdmittanceBlock)
    pulling: PullingBlock = field(default_factory=PullingBlock)
    guidance: GuidanceBlock = field(default_factory=GuidanceBlock)
    perception: PerceptionBlock = field(default_factory=PerceptionBlock)
    laser: LaserBlock = field(default_factory=LaserBlock)
    sim: SimBlock = field(default_factory=SimBlock)
    base_dir: str = "."

    def with_overrides(self, seed=None, adaptive=None, footprint_half_width=None) -> "Scenario":
        sim = self.sim
        if seed is not None:
            sim = replace(sim, seed=int(seed))
        if adaptive is not None:
            sim = replace(sim, adaptive=bool(adaptive))
        if footprint_half_width is not None:
            sim = replace(sim, footprint_half_width=float(footprint_half_width))
        return replace(self, sim=sim)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("base_dir")
        return d


_BLOCKS = {
    "world": WorldBlock, "human": HumanParams, "impedance": ImpedanceParams,
    "admittance": AdmittanceBlock, "pulling": PullingBlock, "guidance": GuidanceBlock,
    "perception": PerceptionBlock, "laser": LaserBlock, "sim": SimBlock,
}

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_PAIR = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_TRIPLE = {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3}
_POS_TRIPLE = {"type": "array", "items": _POS, "minItems": 3, "maxItems": 3}


def _block(props: dict) -> dict:
    return {"type": "object", "properties": props, "additionalProperties": False}


SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "pullguide scenario",
    "type": "object",
    "required": ["name", "start", "goal", "world"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "start": _TRIPLE,
        "goal": _TRIPLE,
        "path": {"type": "array", "items": _PAIR, "minItems": 1},
        "world": _block({
            "bounds": {"type": "array", "items": _NUM, "minItems": 4, "maxItems": 4},
            "resolution": _POS,
            "segments": {"type": "array", "items": {"type": "array", "items": _NUM,
                                                    "minItems": 4, "maxItems": 4}},
            "discs": {"type": "array", "items": {"type": "array", "items": _NUM,
                                                 "minItems": 3, "maxItems": 3}},
            "moving_discs": {"type": "array", "items": {
                "type": "object", "required": ["start", "velocity", "radius"],
                "additionalProperties": False,
                "properties": {"start": _PAIR, "velocity": _PAIR, "radius": _POS,
                               "t_start": _NUM, "t_end": _NUM}}},
            "grid_file": {"type": "string"},
        }),
        "human": _block({
            "K_arm": _POS, "preferred_speed": _NONNEG, "pursuit_gain": _POS,
            "velocity_tau": _NONNEG, "max_speed": _POS, "stance_half_width": _POS,
            "gait_amplitude": _NONNEG, "stride_length": _POS,
            "shoulder_offset": _PAIR, "hand_offset": _PAIR,
            "drift": {"type": "object", "required": ["kind"], "additionalProperties": False,
                      "properties": {
                          "kind": {"enum": ["profile", "none", "constant", "sinusoidal",
                                            "random_walk"]},
                          "magnitude": _NUM, "frequency": _NONNEG, "phase": _NUM,
                          "sigma": _NONNEG, "reversion": _NONNEG}},
        }),
        "impedance": _block({"k_x": _NONNEG, "k_z": _NONNEG,
                             "damping_ratio": {"type": "number", "exclusiveMinimum": 0,
                                               "maximum": 1},
                             "k_yaw": _NONNEG, "eps_motion": _POS}),
        "admittance": _block({"M": _POS_TRIPLE, "D": _POS_TRIPLE, "limits": _POS_TRIPLE}),
        "pulling": _block({"d_stop": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                           "eta": _NONNEG, "zeta_l": _NONNEG, "gamma": _POS, "kappa": _POS,
                           "y_filter_tau": _NONNEG}),
        "guidance": _block({"D1": _POS, "D2": _POS, "D3": _POS, "hand_height": _POS,
                            "laser_height": _POS, "F_des": _TRIPLE,
                            "negate_yaw": {"type": "boolean"},
                            "waypoint_spacing": _POS, "replan_period": _POS}),
        "perception": _block({"angle_window_deg": _PAIR, "distance_window": _PAIR,
                              "eps": _POS, "min_pts": {"type": "integer", "minimum": 2},
                              "coherence": _POS, "stale_after": _POS, "max_leg_width": _POS,
                              "leg_gap": _PAIR, "tracking_grace": _NONNEG}),
        "laser": _block({"mount": _TRIPLE, "angle_min": _NUM, "angle_max": _NUM,
                         "n_beams": {"type": "integer", "minimum": 2}, "max_range": _POS,
                         "noise_sigma": _NONNEG, "leg_radius": _POS,
                         "scan_every": {"type": "integer", "minimum": 1}}),
        "sim": _block({"dt": _POS, "max_time": _POS, "seed": {"type": "integer"},
                       "adaptive": {"type": "boolean"}, "footprint_half_width": _POS,
                       "goal_tolerance": _POS, "ext_gain": _NONNEG,
                       "collision_inflation": _NONNEG, "planner_margin": _NONNEG,
                       "history_capacity": {"type": "integer", "minimum": 2},
                       "history_min_spacing": _POS, "max_ee_displacement": _POS,
                       "reach": _POS}),
    },
}


def _tuplify(cls, data: dict):
    """Build a block, turning JSON lists into tuples where the default is one."""
    proto = cls()
    kw = {}
    for f in fields(cls):
        if f.name in data:
            v = data[f.name]
            if isinstance(v, list) and isinstance(getattr(proto, f.name), tuple):
                v = tuple(v)
            kw[f.name] = v
    return cls(**kw)


def scenario_from_dict(data: dict, base_dir: str | Path = ".") -> Scenario:
    """Validate a parsed scenario document and build a :class:`Scenario`."""
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioError(f"{loc}: {exc.message}") from None
    w = data["world"]
    if ("bounds" in w) == ("grid_file" in w):
        raise ScenarioError("world: give exactly one of 'bounds' or 'grid_file'")
    kw = {}
    for key, cls in _BLOCKS.items():
        if key in data:
            kw[key] = _tuplify(cls, data[key])
    sc = Scenario(name=data["name"], start=tuple(data["start"]), goal=tuple(data["goal"]),
                  path=data.get("path"), base_dir=str(base_dir), **kw)
    p = sc.pulling
    if not p.eta > p.zeta_l:
        raise ScenarioError("pulling: eta must exceed zeta_l")
    pw = sc.perception
    if not (pw.angle_window_deg[0] < pw.angle_window_deg[1]
            and pw.distance_window[0] < pw.distance_window[1]):
        raise ScenarioError("perception: empty passthrough window")
    return sc


BUILTIN = ("straight", "s_curve", "corridor_turns", "pillar_room")


def builtin_path(name: str) -> Path:
    return Path(str(resources.files("pullguide.scenarios").joinpath(f"{name}.json")))


def load_scenario(path) -> Scenario:
    """Load a scenario from a JSON file; bare builtin names are also accepted."""
    p = Path(path)
    if not p.exists() and str(path) in BUILTIN:
        p = builtin_path(str(path))
    if not p.exists():
        raise ScenarioError(f"scenario file not found: {path}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{p}: invalid JSON ({exc})") from None
    return scenario_from_dict(data, p.parent)
