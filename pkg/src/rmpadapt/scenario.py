"""Scenario configuration: schema validation and assembly of the policy stack.

The scenario file is a versioned YAML document.  ``validate_config`` checks
structure and ranges and raises ``ConfigParse`` naming the offending field;
``build_scenario`` turns a validated document into the immutable ``Scenario``
bundle consumed by the simulator, the batch harness and the live service.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Optional

import numpy as np
import yaml

from .adaptation import AdaptationConfig
from .errors import ConfigParse
from .geometry import Chart, CylinderChart, Pose
from .policies import (
    ROTATION_MODES,
    AttractorParams,
    HumanView,
    KeeperParams,
    make_distance_keeping,
    make_inspection_position,
    make_inspection_rotation,
    make_normal_keeping,
    make_position_view,
    make_rotation_view,
)
from .rmp import PolicySpec

SCHEMA_VERSION = 1
N_TARGETS = 6


@dataclass(frozen=True, eq=False)
class Target:
    index: int
    z: float
    angle: float            # chart angle theta, rad
    mode: str               # horizontal | vertical
    coords: np.ndarray      # (z, s, standoff) on the position manifold
    pose: Pose              # full target pose at standoff with the mode rotation


@dataclass(frozen=True)
class SimParams:
    dt: float
    max_duration: float
    speed_fuse: float


@dataclass(frozen=True)
class CompletionParams:
    position_tol: float      # m
    rotation_tol: float      # rad
    dwell: float             # s
    convergence_threshold: float

    def dwell_ticks(self, dt: float) -> int:
        return max(1, int(round(self.dwell / dt)))


@dataclass(frozen=True)
class ServiceParams:
    deadman_timeout: float
    broadcast_every: int


@dataclass(frozen=True, eq=False)
class Scenario:
    cylinder: CylinderChart
    targets: tuple           # Target x 6, visit order
    standoff: float
    mission_specs: tuple     # PolicySpec x 8: positions 0..5, rotation h=6, v=7
    mission_views: tuple     # HumanView x 8, same order
    safety_specs: tuple      # PolicySpec x 2: normal keeping, distance keeping
    human_chart: Chart
    adaptation: AdaptationConfig
    alpha_init: float
    sim: SimParams
    completion: CompletionParams
    service: ServiceParams
    start_pose: Pose
    config: dict             # resolved snapshot, embedded in traces

    @property
    def n_mission(self) -> int:
        return len(self.mission_specs)

    @property
    def n_policies(self) -> int:
        return len(self.mission_specs) + len(self.safety_specs)

    def rotation_index(self, mode: str) -> int:
        return N_TARGETS + sorted(ROTATION_MODES).index(mode)

    def policy_names(self) -> list:
        return [s.name for s in self.mission_specs] + [s.name for s in self.safety_specs]


# ------------------------------------------------------------------ checking

def _get(cfg: dict, path: str, kind, required: bool = True, default=None):
    node = cfg
    walked = []
    for key in path.split("."):
        walked.append(key)
        if not isinstance(node, dict) or key not in node:
            if required:
                raise ConfigParse(".".join(walked), "missing")
            return default
        node = node[key]
    if kind is float:
        if isinstance(node, bool) or not isinstance(node, (int, float)):
            raise ConfigParse(path, f"expected a number, got {type(node).__name__}")
        return float(node)
    if kind is int:
        if isinstance(node, bool) or not isinstance(node, int):
            raise ConfigParse(path, f"expected an integer, got {type(node).__name__}")
        return node
    if not isinstance(node, kind):
        raise ConfigParse(path, f"expected {kind.__name__}, got {type(node).__name__}")
    return node


def _vector(cfg: dict, path: str, length: int) -> np.ndarray:
    raw = _get(cfg, path, list)
    if len(raw) != length or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw):
        raise ConfigParse(path, f"expected {length} numbers")
    return np.asarray(raw, dtype=float)


def _positive(cfg: dict, path: str) -> float:
    value = _get(cfg, path, float)
    if value <= 0.0:
        raise ConfigParse(path, "must be positive")
    return value


def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigParse(str(path), f"unreadable: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigParse(str(path), f"invalid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigParse(str(path), "top level must be a mapping")
    return doc


def reference_config() -> dict:
    text = resources.files("rmpadapt").joinpath("data/reference_scenario.yaml").read_text()
    return yaml.safe_load(text)


def validate_config(cfg: dict) -> dict:
    """Structural and range validation; raises ConfigParse naming the field."""
    if not isinstance(cfg, dict):
        raise ConfigParse("<root>", "config must be a mapping")
    version = _get(cfg, "schema_version", int)
    if version != SCHEMA_VERSION:
        raise ConfigParse("schema_version", f"unsupported version {version}")

    _vector(cfg, "cylinder.origin", 3)
    axis = _vector(cfg, "cylinder.axis", 3)
    if np.linalg.norm(axis) < 1e-9:
        raise ConfigParse("cylinder.axis", "must be nonzero")
    _positive(cfg, "cylinder.radius")
    height = _positive(cfg, "cylinder.height")
    seam = _vector(cfg, "cylinder.seam_reference", 3)
    axis_unit = axis / np.linalg.norm(axis)
    if np.linalg.norm(seam - axis_unit * float(seam @ axis_unit)) < 1e-9:
        raise ConfigParse("cylinder.seam_reference", "must not be parallel to the axis")

    _positive(cfg, "standoff")

    targets = _get(cfg, "targets", list)
    if len(targets) != N_TARGETS:
        raise ConfigParse("targets", f"expected {N_TARGETS} entries, got {len(targets)}")
    for i, entry in enumerate(targets):
        if not isinstance(entry, dict):
            raise ConfigParse(f"targets[{i}]", "expected a mapping")
        for key in ("z", "angle_deg", "mode"):
            if key not in entry:
                raise ConfigParse(f"targets[{i}].{key}", "missing")
        tz, ang, mode = entry["z"], entry["angle_deg"], entry["mode"]
        if isinstance(tz, bool) or not isinstance(tz, (int, float)) or not 0.0 <= tz <= height:
            raise ConfigParse(f"targets[{i}].z", f"must be a number in [0, {height}]")
        if isinstance(ang, bool) or not isinstance(ang, (int, float)) or not -180.0 < ang <= 180.0:
            raise ConfigParse(f"targets[{i}].angle_deg", "must be a number in (-180, 180]")
        if mode not in ROTATION_MODES:
            raise ConfigParse(f"targets[{i}].mode", f"unknown mode '{mode}'")

    _get(cfg, "start.z", float)
    _get(cfg, "start.angle_deg", float)
    _positive(cfg, "start.standoff")
    _get(cfg, "start.tool_angle_deg", float)

    _positive(cfg, "policies.attractor.gain")
    _positive(cfg, "policies.attractor.soft_radius")
    att_damp = _get(cfg, "policies.attractor.damping", float)
    if att_damp < 0.0:
        raise ConfigParse("policies.attractor.damping", "must be >= 0")
    _positive(cfg, "policies.attractor.metric_weight")
    for keeper in ("distance_keeper", "normal_keeper"):
        for field in ("stiffness", "barrier_scale", "metric_floor", "ramp_sharpness"):
            _positive(cfg, f"policies.{keeper}.{field}")
        damp = _get(cfg, f"policies.{keeper}.damping", float)
        if damp < 0.0:
            raise ConfigParse(f"policies.{keeper}.damping", "must be >= 0")
    _positive(cfg, "policies.normal_keeper.critical_angle_deg")

    gain = _vector(cfg, "adaptation.gain", 3)
    if np.min(gain) <= 0.0:
        raise ConfigParse("adaptation.gain", "diagonal entries must be positive")
    step = _positive(cfg, "adaptation.scale_step")
    if step > 1.0:
        raise ConfigParse("adaptation.scale_step", "must be in (0, 1]")
    tol = _get(cfg, "adaptation.conflict_tol", float)
    if tol < 0.0:
        raise ConfigParse("adaptation.conflict_tol", "must be >= 0")
    alpha_init = _get(cfg, "adaptation.alpha_init", float)
    if not 0.0 <= alpha_init <= 1.0:
        raise ConfigParse("adaptation.alpha_init", "must be in [0, 1]")

    _positive(cfg, "sim.dt")
    _positive(cfg, "sim.max_duration")
    _positive(cfg, "sim.speed_fuse")

    _positive(cfg, "completion.position_tol")
    _positive(cfg, "completion.rotation_tol_deg")
    _positive(cfg, "completion.dwell")
    thr = _get(cfg, "completion.convergence_threshold", float)
    if not 0.0 < thr <= 1.0:
        raise ConfigParse("completion.convergence_threshold", "must be in (0, 1]")

    _positive(cfg, "service.deadman_timeout")
    every = _get(cfg, "service.broadcast_every", int)
    if every < 1:
        raise ConfigParse("service.broadcast_every", "must be >= 1")
    return cfg


# ------------------------------------------------------------------ assembly

def build_scenario(cfg: dict) -> Scenario:
    cfg = validate_config(cfg)
    cylinder = CylinderChart(
        origin=_vector(cfg, "cylinder.origin", 3),
        axis=_vector(cfg, "cylinder.axis", 3),
        radius=_get(cfg, "cylinder.radius", float),
        seam_reference=_vector(cfg, "cylinder.seam_reference", 3),
    )
    standoff = _get(cfg, "standoff", float)

    att = AttractorParams(
        gain=_get(cfg, "policies.attractor.gain", float),
        soft_radius=_get(cfg, "policies.attractor.soft_radius", float),
        damping=_get(cfg, "policies.attractor.damping", float),
        metric_weight=_get(cfg, "policies.attractor.metric_weight", float),
    )

    def keeper(name: str) -> KeeperParams:
        return KeeperParams(
            stiffness=_get(cfg, f"policies.{name}.stiffness", float),
            barrier_scale=_get(cfg, f"policies.{name}.barrier_scale", float),
            metric_floor=_get(cfg, f"policies.{name}.metric_floor", float),
            ramp_sharpness=_get(cfg, f"policies.{name}.ramp_sharpness", float),
            damping=_get(cfg, f"policies.{name}.damping", float),
        )

    targets = []
    position_specs = []
    position_views = []
    for i, entry in enumerate(cfg["targets"]):
        theta = float(np.radians(entry["angle_deg"]))
        coords = np.array([float(entry["z"]), cylinder.radius * theta, standoff])
        pose = cylinder.target_pose(float(entry["z"]), theta, standoff,
                                    ROTATION_MODES[entry["mode"]])
        targets.append(Target(index=i, z=float(entry["z"]), angle=theta,
                              mode=entry["mode"], coords=coords, pose=pose))
        position_specs.append(make_inspection_position(cylinder, coords, att))
        position_views.append(make_position_view(cylinder, coords, att))

    rotation_specs = [make_inspection_rotation(cylinder, m, att) for m in sorted(ROTATION_MODES)]
    rotation_views = [make_rotation_view(cylinder, m, att) for m in sorted(ROTATION_MODES)]

    safety_specs = (
        make_normal_keeping(cylinder,
                            crit_angle=float(np.radians(_get(cfg, "policies.normal_keeper.critical_angle_deg", float))),
                            params=keeper("normal_keeper")),
        make_distance_keeping(cylinder, standoff, params=keeper("distance_keeper")),
    )

    adaptation = AdaptationConfig(
        gain=_vector(cfg, "adaptation.gain", 3),
        scale_step=_get(cfg, "adaptation.scale_step", float),
        conflict_tol=_get(cfg, "adaptation.conflict_tol", float),
        update_rate=1.0 / _get(cfg, "sim.dt", float),
    )

    start_pose = cylinder.target_pose(
        _get(cfg, "start.z", float),
        float(np.radians(_get(cfg, "start.angle_deg", float))),
        _get(cfg, "start.standoff", float),
        float(np.radians(_get(cfg, "start.tool_angle_deg", float))),
    )

    return Scenario(
        cylinder=cylinder,
        targets=tuple(targets),
        standoff=standoff,
        mission_specs=tuple(position_specs + rotation_specs),
        mission_views=tuple(position_views + rotation_views),
        safety_specs=safety_specs,
        human_chart=cylinder.surface_chart(),
        adaptation=adaptation,
        alpha_init=_get(cfg, "adaptation.alpha_init", float),
        sim=SimParams(dt=_get(cfg, "sim.dt", float),
                      max_duration=_get(cfg, "sim.max_duration", float),
                      speed_fuse=_get(cfg, "sim.speed_fuse", float)),
        completion=CompletionParams(
            position_tol=_get(cfg, "completion.position_tol", float),
            rotation_tol=float(np.radians(_get(cfg, "completion.rotation_tol_deg", float))),
            dwell=_get(cfg, "completion.dwell", float),
            convergence_threshold=_get(cfg, "completion.convergence_threshold", float)),
        service=ServiceParams(
            deadman_timeout=_get(cfg, "service.deadman_timeout", float),
            broadcast_every=_get(cfg, "service.broadcast_every", int)),
        start_pose=start_pose,
        config=cfg,
    )


def load_scenario(path) -> Scenario:
    return build_scenario(load_config(path))


def reference_scenario() -> Scenario:
    return build_scenario(reference_config())
