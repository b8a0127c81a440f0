"""Closed-loop episode simulator.

One tick: sample the operator, re-weight the mission policies from that
input, compose the robot acceleration from the weighted policy stack, record,
then integrate with a semi-implicit Euler step.  The recorded row therefore
holds the state the operator reacted to alongside the weights produced by
that reaction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .adaptation import adaptation_step, clamp_unit
from .errors import DimensionMismatch, Diverged
from .geometry import (
    Pose,
    Twist,
    ZERO_TWIST,
    chart_apply,
    chart_jacobian,
    orientation_error,
    quat_exp,
    quat_mul,
    quat_normalize,
)
from .rmp import MotionPolicy, evaluate, pullback, rmp_sum
from .scenario import Scenario, Target


@dataclass(frozen=True, eq=False)
class RobotState:
    pose: Pose
    twist: Twist
    time: float = 0.0


@dataclass(frozen=True, eq=False)
class TickRecord:
    t: float
    pose: np.ndarray      # 7: position xyz + quaternion wxyz
    twist: np.ndarray     # 6
    u_h: np.ndarray       # 3, operator input after ingestion clamp
    u_r: np.ndarray       # 6, composed acceleration
    alpha: np.ndarray     # mission weights after this tick's update
    p: np.ndarray         # per-policy likelihood
    cond: np.ndarray
    prior: np.ndarray
    phi: np.ndarray       # potentials, mission order then safety order


@dataclass(eq=False)
class EpisodeTrace:
    meta: dict
    records: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def initial_state(scenario: Scenario) -> RobotState:
    return RobotState(pose=scenario.start_pose, twist=ZERO_TWIST, time=0.0)


# ------------------------------------------------------------- policy stack

def _stack_terms(state: RobotState, scenario: Scenario,
                 alpha: np.ndarray) -> tuple:
    """One chart pass over the full stack: pulled-back policies (mission
    metrics scaled) plus the potential of every policy for diagnostics."""
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    if alpha.shape[0] != scenario.n_mission:
        raise DimensionMismatch(f"expected {scenario.n_mission} weights, got {alpha.shape[0]}")
    xi = state.twist.as_vector()
    policies = []
    phi = []
    for spec, a in zip(scenario.mission_specs, alpha):
        jac = chart_jacobian(spec.chart, state.pose)
        coords = chart_apply(spec.chart, state.pose)
        local = pullback(evaluate(spec, coords, jac @ xi), jac)
        policies.append(MotionPolicy(accel=local.accel, metric=a * local.metric))
        phi.append(spec.potential(coords))
    for spec in scenario.safety_specs:
        jac = chart_jacobian(spec.chart, state.pose)
        coords = chart_apply(spec.chart, state.pose)
        policies.append(pullback(evaluate(spec, coords, jac @ xi), jac))
        phi.append(spec.potential(coords))
    return policies, np.array(phi)


def _pulled_policies(state: RobotState, scenario: Scenario,
                     alpha: np.ndarray) -> list:
    """All ten policies pulled back to twist space, mission metrics scaled."""
    return _stack_terms(state, scenario, alpha)[0]


def compose_motion(state: RobotState, scenario: Scenario,
                   alpha: np.ndarray) -> np.ndarray:
    """Weighted combination of the full policy stack; returns the 6-dof
    acceleration command."""
    return rmp_sum(_pulled_policies(state, scenario, alpha)).accel


def mission_force(state: RobotState, scenario: Scenario,
                  alpha: np.ndarray) -> np.ndarray:
    """Weighted sum of pulled-back mission potential forces, the quantity
    whose norm vanishes at a converged viewpoint."""
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    total = np.zeros(6)
    xi = state.twist.as_vector()
    for spec, a in zip(scenario.mission_specs, alpha):
        jac = chart_jacobian(spec.chart, state.pose)
        coords = chart_apply(spec.chart, state.pose)
        metric = spec.metric_fn(coords, jac @ xi)
        total += a * (jac.T @ (metric @ spec.gradient(coords)))
    return total


def policy_potentials(state: RobotState, scenario: Scenario) -> np.ndarray:
    """Potential value of every policy at the current pose (diagnostics)."""
    values = []
    for spec in list(scenario.mission_specs) + list(scenario.safety_specs):
        values.append(spec.potential(chart_apply(spec.chart, state.pose)))
    return np.array(values)


def integrate_step(state: RobotState, u_r: np.ndarray, dt: float) -> RobotState:
    """Semi-implicit Euler: velocity first, then pose with the new velocity.
    Orientation integrates in the body frame to match the twist convention."""
    u_r = np.asarray(u_r, dtype=float).reshape(6)
    xi = state.twist.as_vector() + u_r * dt
    position = state.pose.position + xi[:3] * dt
    orientation = quat_normalize(
        quat_mul(state.pose.orientation, quat_exp(xi[3:] * dt)))
    return RobotState(pose=Pose(position, orientation),
                      twist=Twist(xi[:3], xi[3:]),
                      time=state.time + dt)


# --------------------------------------------------------------- completion

class CompletionTracker:
    """Dwell check: a target counts as reached once the pose stays inside
    both tolerance bands for `dwell` consecutive seconds."""

    def __init__(self, target: Target, scenario: Scenario):
        self.target = target
        self.position_tol = scenario.completion.position_tol
        self.rotation_tol = scenario.completion.rotation_tol
        self.required = scenario.completion.dwell_ticks(scenario.sim.dt)
        self.streak = 0
        self.done = False

    def errors(self, pose: Pose) -> tuple:
        trans = float(np.linalg.norm(pose.position - self.target.pose.position))
        rot = orientation_error(pose.orientation, self.target.pose.orientation)
        return trans, rot

    def update(self, pose: Pose) -> bool:
        if self.done:
            return True
        trans, rot = self.errors(pose)
        if trans <= self.position_tol and rot <= self.rotation_tol:
            self.streak += 1
        else:
            self.streak = 0
        if self.streak >= self.required:
            self.done = True
        return self.done


# ------------------------------------------------------------------ stepper

class Stepper:
    """Single-tick driver shared by the batch loop and the live service.

    Owns the robot state and the mission weights; ``tick`` consumes one
    operator input and advances the world by ``dt``.
    """

    def __init__(self, scenario: Scenario, alpha0: Optional[np.ndarray] = None):
        self.scenario = scenario
        self.state = initial_state(scenario)
        if alpha0 is None:
            self.alpha = np.full(scenario.n_mission, scenario.alpha_init, dtype=float)
        else:
            self.alpha = np.asarray(alpha0, dtype=float).reshape(scenario.n_mission).copy()
        self.ticks = 0

    def surface_state(self) -> tuple:
        """Operator-facing coordinates (h, hdot) of the current state."""
        h = chart_apply(self.scenario.human_chart, self.state.pose)
        jac = chart_jacobian(self.scenario.human_chart, self.state.pose)
        return h, jac @ self.state.twist.as_vector()

    def tick(self, u_h: np.ndarray) -> TickRecord:
        scn = self.scenario
        u_h = clamp_unit(np.asarray(u_h, dtype=float).reshape(3))
        h, hdot = self.surface_state()
        self.alpha, report = adaptation_step(scn.mission_views, h, hdot,
                                             u_h, self.alpha, scn.adaptation)
        policies, phi = _stack_terms(self.state, scn, self.alpha)
        u_r = rmp_sum(policies).accel
        record = TickRecord(
            t=self.state.time,
            pose=np.concatenate([self.state.pose.position,
                                 self.state.pose.orientation]),
            twist=self.state.twist.as_vector(),
            u_h=u_h,
            u_r=u_r,
            alpha=self.alpha.copy(),
            p=report.likelihood,
            cond=report.conditional,
            prior=report.prior,
            phi=phi,
        )
        self.state = integrate_step(self.state, u_r, scn.sim.dt)
        self.ticks += 1
        speed = float(np.linalg.norm(self.state.twist.as_vector()))
        if speed > scn.sim.speed_fuse:
            raise Diverged(f"twist norm {speed:.2f} exceeded fuse "
                           f"{scn.sim.speed_fuse} at t={self.state.time:.2f}")
        return record


# ------------------------------------------------------------------ episode

def run_episode(scenario: Scenario, operator, seed: int = 0,
                alpha0: Optional[np.ndarray] = None,
                max_duration: Optional[float] = None) -> EpisodeTrace:
    """Run one closed-loop episode; deterministic given (scenario, operator
    kind, seed).  Raises Diverged if the twist norm crosses the fuse."""
    dt = scenario.sim.dt
    horizon = scenario.sim.max_duration if max_duration is None else max_duration
    n_ticks = int(round(horizon / dt))
    operator.reset(scenario, seed)
    stepper = Stepper(scenario, alpha0)

    trace = EpisodeTrace(meta={
        "schema": 1,
        "kind": "episode_trace",
        "scenario": scenario.config,
        "operator": operator.describe(),
        "seed": int(seed),
    })

    for _ in range(n_ticks):
        h, hdot = stepper.surface_state()
        u_h = operator(stepper.state, h, hdot)
        trace.records.append(stepper.tick(u_h))
        if operator.finished:
            break
    return trace
