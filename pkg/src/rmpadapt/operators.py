"""Scripted operator models used by the batch harness and the tests.

All models share one calling convention: ``reset(scenario, seed)`` at
episode start, then one call per tick with the current robot state and its
surface coordinates, returning a corrective input inside the unit ball.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .adaptation import AdaptationConfig
from .errors import BadParams
from .geometry import Pose
from .scenario import Scenario

DEGENERATE_GRADIENT = 1e-9
_FALLBACK_POINTS = 8192


def _sphere_directions(n: int) -> np.ndarray:
    """Deterministic near-uniform covering of the unit sphere (golden spiral)."""
    k = np.arange(n) + 0.5
    polar = np.arccos(1.0 - 2.0 * k / n)
    azimuth = np.pi * (1.0 + np.sqrt(5.0)) * k
    return np.column_stack([np.sin(polar) * np.cos(azimuth),
                            np.sin(polar) * np.sin(azimuth),
                            np.cos(polar)])


def _implied_alignment(us: np.ndarray, gain: np.ndarray, hdot: np.ndarray,
                       uphill: np.ndarray) -> np.ndarray:
    """Cosine between each input's implied desired gradient and ``uphill``."""
    implied = -(hdot[None, :] + us @ gain.T)
    norms = np.linalg.norm(implied, axis=1)
    norms = np.where(norms < 1e-12, np.inf, norms)
    return (implied @ uphill) / norms


def perfect_input(target_view, h: np.ndarray, hdot: np.ndarray,
                  cfg: AdaptationConfig) -> np.ndarray:
    """Unit-norm input that makes the implied desired gradient point exactly
    down ``target_view``'s potential, when such an input exists.

    Solves hdot + K u = -c * grad/|grad| for u on the unit sphere with
    c > 0.  When no exact solution exists (robot already moving faster than
    one input unit can redirect), falls back to a dense search over unit
    inputs for the one whose implied desired gradient climbs the feature's
    potential most steeply.
    """
    grad = np.asarray(target_view.gradient(np.asarray(h, dtype=float)), dtype=float)
    norm = float(np.linalg.norm(grad))
    if norm < DEGENERATE_GRADIENT:
        return np.zeros(grad.shape[0])
    descent = -grad / norm
    gain = np.asarray(cfg.gain, dtype=float)
    a = np.linalg.solve(gain, descent)
    b = np.linalg.solve(gain, np.asarray(hdot, dtype=float))

    aa = float(a @ a)
    ab = float(a @ b)
    bb = float(b @ b)
    disc = ab * ab - aa * (bb - 1.0)
    if disc >= 0.0:
        c = (ab + float(np.sqrt(disc))) / aa
        if c > 0.0:
            return c * a - b

    # no exact solution reachable: coarse covering of the unit sphere, then
    # two rounds of local refinement around the best direction
    hdot = np.asarray(hdot, dtype=float)
    uphill = grad / norm
    candidates = _sphere_directions(_FALLBACK_POINTS)
    best = candidates[int(np.argmax(_implied_alignment(candidates, gain, hdot, uphill)))]
    spacing = float(np.sqrt(4.0 * np.pi / _FALLBACK_POINTS))
    for _ in range(2):
        t1 = np.eye(3)[int(np.argmin(np.abs(best)))]
        t1 = t1 - best * float(best @ t1)
        t1 /= float(np.linalg.norm(t1))
        t2 = np.cross(best, t1)
        offsets = np.linspace(-spacing, spacing, 21)
        da, db = np.meshgrid(offsets, offsets)
        local = (best[None, :] + da.reshape(-1, 1) * t1[None, :]
                 + db.reshape(-1, 1) * t2[None, :])
        local /= np.linalg.norm(local, axis=1, keepdims=True)
        best = local[int(np.argmax(_implied_alignment(local, gain, hdot, uphill)))]
        spacing *= 0.1
    return best


def noisy_input(base: np.ndarray, noise_std: float, rng: np.random.Generator) -> np.ndarray:
    """Perfect input corrupted with isotropic noise, reprojected to the
    unit ball."""
    if noise_std < 0.0:
        raise BadParams("noise_std must be >= 0")
    u = np.asarray(base, dtype=float) + rng.normal(0.0, noise_std, size=len(base))
    n = float(np.linalg.norm(u))
    return u / n if n > 1.0 else u


class _CombinedView:
    """Position and rotation objectives of one viewpoint as a single
    demonstration target (their gradients live on disjoint axes)."""

    def __init__(self, views):
        self.views = list(views)

    def gradient(self, h: np.ndarray) -> np.ndarray:
        total = np.zeros(len(h))
        for v in self.views:
            total = total + v.gradient(h)
        return total


class Operator:
    kind = "operator"

    def reset(self, scenario: Scenario, seed: int) -> None:
        raise NotImplementedError

    def __call__(self, state, h: np.ndarray, hdot: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def finished(self) -> bool:
        return False

    def describe(self) -> dict:
        return {"kind": self.kind}


class IdleOperator(Operator):
    """Never touches the stick; the episode runs to its horizon."""

    kind = "idle"

    def reset(self, scenario: Scenario, seed: int) -> None:
        self._dim = len(scenario.human_chart.periods)

    def __call__(self, state, h, hdot) -> np.ndarray:
        return np.zeros(self._dim)


class PerfectOperator(Operator):
    """Demonstrates the scenario's viewpoints in order, driving position and
    required rotation together, advancing when the dwell check passes."""

    kind = "perfect"

    def reset(self, scenario: Scenario, seed: int) -> None:
        from .simulation import CompletionTracker  # cycle: simulation imports scenario only
        self.scenario = scenario
        self.index = 0
        self._tracker_cls = CompletionTracker
        self.tracker = CompletionTracker(scenario.targets[0], scenario)
        self._done = False

    def _advance(self, pose: Pose) -> None:
        # one dwell update per tick; a freshly created tracker first sees the
        # *next* tick's pose, which the post-hoc interval recovery mirrors
        if self._done or not self.tracker.update(pose):
            return
        self.index += 1
        if self.index >= len(self.scenario.targets):
            self._done = True
        else:
            self.tracker = self._tracker_cls(self.scenario.targets[self.index],
                                             self.scenario)

    def _target_view(self):
        scn = self.scenario
        target = scn.targets[self.index]
        return _CombinedView([
            scn.mission_views[target.index],
            scn.mission_views[scn.rotation_index(target.mode)],
        ])

    def __call__(self, state, h, hdot) -> np.ndarray:
        self._advance(state.pose)
        if self._done:
            return np.zeros(len(h))
        return perfect_input(self._target_view(), h, hdot, self.scenario.adaptation)

    @property
    def finished(self) -> bool:
        return self._done


class NoisyOperator(PerfectOperator):
    """Perfect schedule with seeded isotropic input noise."""

    kind = "noisy"

    def __init__(self, noise_std: float = 0.2):
        if noise_std < 0.0:
            raise BadParams("noise_std must be >= 0")
        self.noise_std = noise_std

    def reset(self, scenario: Scenario, seed: int) -> None:
        super().reset(scenario, seed)
        self.rng = np.random.default_rng(seed)

    def __call__(self, state, h, hdot) -> np.ndarray:
        base = super().__call__(state, h, hdot)
        return noisy_input(base, self.noise_std, self.rng)

    def describe(self) -> dict:
        return {"kind": self.kind, "noise_std": self.noise_std}


class ReplayOperator(Operator):
    """Re-emits the operator inputs recorded in an earlier trace."""

    kind = "replay"

    def __init__(self, inputs):
        self.inputs = [np.asarray(u, dtype=float).reshape(-1) for u in inputs]
        if not self.inputs:
            raise BadParams("replay requires at least one recorded input")
        self._cursor = 0

    @classmethod
    def from_trace(cls, trace) -> "ReplayOperator":
        return cls([r.u_h for r in trace.records])

    def reset(self, scenario: Scenario, seed: int) -> None:
        self._cursor = 0

    def __call__(self, state, h, hdot) -> np.ndarray:
        u = self.inputs[self._cursor]
        self._cursor += 1
        return u

    @property
    def finished(self) -> bool:
        return self._cursor >= len(self.inputs)

    def describe(self) -> dict:
        return {"kind": self.kind, "length": len(self.inputs)}


def make_operator(kind: str, noise_std: float = 0.2,
                  replay_inputs: Optional[list] = None) -> Operator:
    if kind == "perfect":
        return PerfectOperator()
    if kind == "noisy":
        return NoisyOperator(noise_std)
    if kind == "idle":
        return IdleOperator()
    if kind == "replay":
        if replay_inputs is None:
            raise BadParams("replay operator needs a source trace")
        return ReplayOperator(replay_inputs)
    raise BadParams(f"unknown operator kind '{kind}'")
