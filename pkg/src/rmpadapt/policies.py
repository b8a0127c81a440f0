"""Factories for the inspection-scenario policies.

Mission policies (scaled by the adaptation layer):
  * inspection position — soft-norm attractor on (z, s, distance);
  * inspection rotation — wrapped quadratic on the tool rotation angle.

Safety policies (always fully weighted):
  * distance keeping — quadratic well at the standoff distance with a
    sigmoid metric that grows steep on the near side;
  * normal keeping — quadratic on the tool tilt angle with a sigmoid
    metric ramp over the tilt.

Each mission factory has a human-view counterpart expressing the same
objective on the operator manifold (z, s, phi); coordinates the operator
cannot command carry zero metric weight there.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BadParams
from .geometry import CylinderChart, wrap_diff
from .rmp import PolicySpec

ROTATION_MODES = {"horizontal": 0.0, "vertical": 0.5 * np.pi}


@dataclass(frozen=True)
class AttractorParams:
    gain: float = 4.0           # acceleration bound (soft-norm) or angular stiffness
    soft_radius: float = 0.05   # m, smoothing radius of the soft norm
    damping: float = 4.0        # 1/s
    metric_weight: float = 1.0

    def __post_init__(self):
        if self.gain <= 0.0 or self.soft_radius <= 0.0:
            raise BadParams("attractor gain and soft_radius must be positive")
        if self.damping < 0.0 or self.metric_weight <= 0.0:
            raise BadParams("attractor damping must be >= 0 and metric_weight > 0")


@dataclass(frozen=True)
class KeeperParams:
    stiffness: float = 100.0
    barrier_scale: float = 50.0
    metric_floor: float = 0.1
    ramp_sharpness: float = 100.0
    damping: float = 20.0

    def __post_init__(self):
        if min(self.stiffness, self.barrier_scale, self.metric_floor, self.ramp_sharpness) <= 0.0:
            raise BadParams("keeper parameters must be positive")
        if self.damping < 0.0:
            raise BadParams("keeper damping must be >= 0")


@dataclass(frozen=True, eq=False)
class HumanView:
    """A mission policy seen through the operator manifold (z, s, phi)."""

    optimum: np.ndarray                              # h* with zeros on unweighted axes
    gradient: Callable[[np.ndarray], np.ndarray]
    metric: Callable[[np.ndarray], np.ndarray]
    periods: tuple

    def __post_init__(self):
        object.__setattr__(self, "optimum", np.asarray(self.optimum, dtype=float).reshape(-1).copy())


def _soft_norm_terms(delta: np.ndarray, sigma: float):
    r = float(np.sqrt(np.dot(delta, delta) + sigma * sigma))
    return r - sigma, delta / r


def _wrapped_delta(coords: np.ndarray, target: np.ndarray, periods) -> np.ndarray:
    delta = np.asarray(coords, dtype=float) - target
    out = delta.copy()
    for i, period in enumerate(periods):
        if period is not None:
            out[i] = wrap_diff(delta[i], period)
    return out


# ------------------------------------------------------------------- mission

def make_inspection_position(cylinder: CylinderChart, target_coords,
                             params: AttractorParams = AttractorParams()) -> PolicySpec:
    """Attractor toward (z, s, standoff distance) on the position manifold.

    The potential is gain * (sqrt(|delta|^2 + sigma^2) - sigma): quadratic
    near the target, linear far away, gradient bounded by ``gain``.
    """
    chart = cylinder.position_chart()
    target = np.asarray(target_coords, dtype=float).reshape(3).copy()
    max_s = np.pi * cylinder.radius
    if abs(target[1]) > max_s:
        raise BadParams(f"target arc length {target[1]:.3f} outside (-pi*R, pi*R]")
    eta, sigma, w = params.gain, params.soft_radius, params.metric_weight

    def potential(x: np.ndarray) -> float:
        value, _ = _soft_norm_terms(_wrapped_delta(x, target, chart.periods), sigma)
        return eta * value

    def gradient(x: np.ndarray) -> np.ndarray:
        _, direction = _soft_norm_terms(_wrapped_delta(x, target, chart.periods), sigma)
        return eta * direction

    def metric_fn(x: np.ndarray, xdot: np.ndarray) -> np.ndarray:
        return w * np.eye(3)

    return PolicySpec(name=f"position({target[0]:.2f},{target[1]:.2f})", category="mission",
                      chart=chart, potential=potential, gradient=gradient,
                      metric_fn=metric_fn, damping=params.damping, optimum=target)


def make_inspection_rotation(cylinder: CylinderChart, mode: str,
                             params: AttractorParams = AttractorParams()) -> PolicySpec:
    """Attractor toward the horizontal (0) or vertical (pi/2) tool rotation."""
    if mode not in ROTATION_MODES:
        raise BadParams(f"unknown rotation mode '{mode}'")
    chart = cylinder.rotation_chart()
    phi_mode = ROTATION_MODES[mode]
    eta, w = params.gain, params.metric_weight

    def potential(x: np.ndarray) -> float:
        e = wrap_diff(x[0] - phi_mode, 2.0 * np.pi)
        return 0.5 * eta * e * e

    def gradient(x: np.ndarray) -> np.ndarray:
        return np.array([eta * wrap_diff(x[0] - phi_mode, 2.0 * np.pi)])

    def metric_fn(x: np.ndarray, xdot: np.ndarray) -> np.ndarray:
        return w * np.eye(1)

    return PolicySpec(name=f"rotation({mode})", category="mission", chart=chart,
                      potential=potential, gradient=gradient,
                      metric_fn=metric_fn, damping=params.damping,
                      optimum=np.array([phi_mode]))


# -------------------------------------------------------------------- safety

def _sigmoid_ramp(value: float, center: float, sharpness: float,
                  scale: float, floor: float, rising: bool) -> float:
    # rising=False: large below the center (distance keeper);
    # rising=True: large above it (tilt keeper)
    arg = sharpness * (value - center) * (-1.0 if rising else 1.0)
    return scale / (1.0 + float(np.exp(np.clip(arg, -500.0, 500.0)))) + floor


def make_distance_keeping(cylinder: CylinderChart, d_safe: float,
                          params: KeeperParams = KeeperParams()) -> PolicySpec:
    """Hold the standoff distance; the metric dominates inside d_safe."""
    if d_safe <= 0.0:
        raise BadParams("d_safe must be positive")
    chart = cylinder.distance_chart()
    k = params.stiffness

    def potential(x: np.ndarray) -> float:
        e = x[0] - d_safe
        return 0.5 * k * e * e

    def gradient(x: np.ndarray) -> np.ndarray:
        return np.array([k * (x[0] - d_safe)])

    def metric_fn(x: np.ndarray, xdot: np.ndarray) -> np.ndarray:
        a = _sigmoid_ramp(x[0], d_safe, params.ramp_sharpness,
                          params.barrier_scale, params.metric_floor, rising=False)
        return np.array([[a]])

    return PolicySpec(name="distance_keeping", category="safety", chart=chart,
                      potential=potential, gradient=gradient,
                      metric_fn=metric_fn, damping=params.damping,
                      optimum=np.array([d_safe]))


def make_normal_keeping(cylinder: CylinderChart, crit_angle: float = np.radians(20.0),
                        params: KeeperParams = KeeperParams(ramp_sharpness=30.0)) -> PolicySpec:
    """Keep the tool axis on the inward surface normal.

    Coordinates are the 2-D misalignment rotation vector, so the potential
    0.5*k*|x|^2 is exactly 0.5*k*theta^2 in the tilt angle theta; the
    metric ramps up past ``crit_angle``.
    """
    if crit_angle <= 0.0:
        raise BadParams("crit_angle must be positive")
    chart = cylinder.alignment_chart()
    k = params.stiffness

    def potential(x: np.ndarray) -> float:
        return 0.5 * k * float(np.dot(x, x))

    def gradient(x: np.ndarray) -> np.ndarray:
        return k * np.asarray(x, dtype=float)

    def metric_fn(x: np.ndarray, xdot: np.ndarray) -> np.ndarray:
        tilt = float(np.linalg.norm(x))
        a = _sigmoid_ramp(tilt, crit_angle, params.ramp_sharpness,
                          params.barrier_scale, params.metric_floor, rising=True)
        return a * np.eye(2)

    return PolicySpec(name="normal_keeping", category="safety", chart=chart,
                      potential=potential, gradient=gradient,
                      metric_fn=metric_fn, damping=params.damping,
                      optimum=np.zeros(2))


# --------------------------------------------------------------- human views

def make_position_view(cylinder: CylinderChart, target_coords,
                       params: AttractorParams = AttractorParams()) -> HumanView:
    """Position objective on (z, s, phi): soft norm over (z, s), phi unweighted."""
    target = np.asarray(target_coords, dtype=float).reshape(-1)
    optimum = np.array([target[0], target[1], 0.0])
    periods = (None, 2.0 * np.pi * cylinder.radius, 2.0 * np.pi)
    eta, sigma, w = params.gain, params.soft_radius, params.metric_weight
    weights = np.diag([w, w, 0.0])

    def gradient(h: np.ndarray) -> np.ndarray:
        delta = _wrapped_delta(h, optimum, periods)
        delta[2] = 0.0
        _, direction = _soft_norm_terms(delta, sigma)
        return eta * direction

    def metric(h: np.ndarray) -> np.ndarray:
        return weights

    return HumanView(optimum=optimum, gradient=gradient, metric=metric, periods=periods)


def make_rotation_view(cylinder: CylinderChart, mode: str,
                       params: AttractorParams = AttractorParams()) -> HumanView:
    if mode not in ROTATION_MODES:
        raise BadParams(f"unknown rotation mode '{mode}'")
    phi_mode = ROTATION_MODES[mode]
    optimum = np.array([0.0, 0.0, phi_mode])
    periods = (None, 2.0 * np.pi * cylinder.radius, 2.0 * np.pi)
    eta, w = params.gain, params.metric_weight
    weights = np.diag([0.0, 0.0, w])

    def gradient(h: np.ndarray) -> np.ndarray:
        return np.array([0.0, 0.0, eta * wrap_diff(h[2] - phi_mode, 2.0 * np.pi)])

    def metric(h: np.ndarray) -> np.ndarray:
        return weights

    return HumanView(optimum=optimum, gradient=gradient, metric=metric, periods=periods)
