"""Post-hoc episode metrics.

Task intervals are recovered from the recorded poses with the same dwell
tracker the scripted operator used live, so in-run and recomputed metrics
agree bit-for-bit.  Never-happened outcomes are NaN sentinels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EmptyTrace
from .geometry import Pose
from .scenario import Scenario
from .simulation import CompletionTracker, EpisodeTrace

NEVER = float("nan")


@dataclass(frozen=True)
class TaskInterval:
    task: int
    start_tick: int                  # first tick whose input demonstrates this task
    completion_tick: Optional[int]   # tick at which the dwell check fired, or None


def _pose(record) -> Pose:
    return Pose(record.pose[:3], record.pose[3:])


def task_intervals(trace: EpisodeTrace, scenario: Scenario) -> list:
    """Replay the dwell trackers over the recorded poses.

    Mirrors the scripted schedule: when task i completes at tick c, the
    operator switches within that same tick, so task i+1 starts at c and its
    tracker first samples the pose at c+1.
    """
    intervals = []
    index = 0
    start = 0
    tracker = CompletionTracker(scenario.targets[0], scenario)
    for k, record in enumerate(trace.records):
        if tracker.update(_pose(record)):
            intervals.append(TaskInterval(index, start, k))
            index += 1
            if index >= len(scenario.targets):
                return intervals
            start = k
            tracker = CompletionTracker(scenario.targets[index], scenario)
    intervals.append(TaskInterval(index, start, None))
    return intervals


def _interval(trace, scenario, task_index) -> Optional[TaskInterval]:
    for interval in task_intervals(trace, scenario):
        if interval.task == task_index:
            return interval
    return None


def compute_effort(trace: EpisodeTrace) -> float:
    """Mean squared input magnitude, 1/T * integral of |u_h|^2 dt."""
    if len(trace) == 0:
        raise EmptyTrace("no records")
    squared = np.array([float(r.u_h @ r.u_h) for r in trace.records])
    times = np.array([r.t for r in trace.records])
    if len(trace) == 1:
        return float(squared[0])
    duration = float(times[-1] - times[0])
    integral = float(np.sum((squared[1:] + squared[:-1]) * np.diff(times)) * 0.5)
    return integral / duration


def compute_convergence_time(trace: EpisodeTrace, task_index: int,
                             scenario: Scenario, feature: str = "position") -> float:
    """Seconds from task start until the demonstrated feature's weight first
    reaches the threshold and stays there through completion; NaN if the task
    never completes or the weight never locks in."""
    interval = _interval(trace, scenario, task_index)
    if interval is None or interval.completion_tick is None:
        return NEVER
    if feature == "position":
        policy = task_index
    elif feature == "rotation":
        policy = scenario.rotation_index(scenario.targets[task_index].mode)
    else:
        raise ValueError(f"unknown feature '{feature}'")
    threshold = scenario.completion.convergence_threshold
    window = trace.records[interval.start_tick:interval.completion_tick + 1]
    locked = None
    for offset, record in enumerate(window):
        if record.alpha[policy] >= threshold:
            if locked is None:
                locked = offset
        else:
            locked = None
    if locked is None:
        return NEVER
    return window[locked].t - window[0].t


def compute_pose_errors(trace: EpisodeTrace, task_index: int,
                        scenario: Scenario) -> tuple:
    """(meters, radians): minimum distance to the task's target pose over the
    dwell window; (NaN, NaN) when the task never completed."""
    interval = _interval(trace, scenario, task_index)
    if interval is None or interval.completion_tick is None:
        return NEVER, NEVER
    tracker = CompletionTracker(scenario.targets[task_index], scenario)
    first = max(interval.start_tick, interval.completion_tick - tracker.required + 1)
    window = trace.records[first:interval.completion_tick + 1]
    errors = [tracker.errors(_pose(r)) for r in window]
    return (min(e[0] for e in errors), min(e[1] for e in errors))


def surface_distances(trace: EpisodeTrace, scenario: Scenario) -> np.ndarray:
    """Standoff distance d at every recorded tick (safety audit)."""
    return np.array([scenario.cylinder.frame_at(r.pose[:3]).d for r in trace.records])


def completion_duration(trace: EpisodeTrace, task_index: int,
                        scenario: Scenario) -> float:
    interval = _interval(trace, scenario, task_index)
    if interval is None or interval.completion_tick is None:
        return NEVER
    return (trace.records[interval.completion_tick].t
            - trace.records[interval.start_tick].t)
