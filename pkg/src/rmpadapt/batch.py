"""Batch episode execution and the summary table."""

from __future__ import annotations

import csv
from pathlib import Path

from .errors import Diverged, IoFailure
from .metrics import (
    completion_duration,
    compute_convergence_time,
    compute_effort,
    compute_pose_errors,
)
from .operators import make_operator
from .scenario import Scenario, build_scenario, load_scenario
from .simulation import EpisodeTrace, run_episode
from .tracefile import read_trace, write_trace

SUMMARY_COLUMNS = ("seed", "task", "convergence_pos_s", "convergence_rot_s",
                   "completion_s", "trans_err_m", "rot_err_rad", "effort")


def trace_filename(seed: int) -> str:
    return f"trace_{seed:04d}.jsonl"


def summary_rows(trace: EpisodeTrace, scenario: Scenario) -> list:
    """One row per scenario task; metrics are NaN for tasks never reached."""
    seed = trace.meta.get("seed", -1)
    effort = compute_effort(trace)
    rows = []
    for task in range(len(scenario.targets)):
        trans, rot = compute_pose_errors(trace, task, scenario)
        rows.append({
            "seed": seed,
            "task": task,
            "convergence_pos_s": compute_convergence_time(trace, task, scenario, "position"),
            "convergence_rot_s": compute_convergence_time(trace, task, scenario, "rotation"),
            "completion_s": completion_duration(trace, task, scenario),
            "trans_err_m": trans,
            "rot_err_rad": rot,
            "effort": effort,
        })
    return rows


def write_summary(rows: list, path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
            writer.writeheader()
            for row in rows:
                writer.writerow({k: repr(v) if isinstance(v, float) else v
                                 for k, v in row.items()})
    except OSError as exc:
        raise IoFailure(f"cannot write summary {path}: {exc}") from exc


def run_batch(config_path, operator_kind: str, seeds: int, out_dir,
              noise_std: float = 0.2, replay_trace=None, log=print) -> int:
    """Execute ``seeds`` episodes, write one trace each plus summary.csv.
    Returns 0 iff every episode finished without tripping the divergence
    fuse."""
    scenario = load_scenario(config_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    replay_inputs = None
    if operator_kind == "replay":
        if replay_trace is None:
            raise IoFailure("replay operator needs --replay-trace")
        replay_inputs = [r.u_h for r in read_trace(replay_trace).records]

    rows = []
    failures = 0
    for seed in range(seeds):
        operator = make_operator(operator_kind, noise_std=noise_std,
                                 replay_inputs=replay_inputs)
        try:
            trace = run_episode(scenario, operator, seed)
        except Diverged as exc:
            failures += 1
            log(f"seed {seed}: DIVERGED ({exc})")
            continue
        path = out / trace_filename(seed)
        write_trace(trace, path)
        episode_rows = summary_rows(trace, scenario)
        rows.extend(episode_rows)
        done = sum(1 for r in episode_rows if r["completion_s"] == r["completion_s"])
        log(f"seed {seed}: {done}/{len(scenario.targets)} tasks, "
            f"{len(trace)} ticks -> {path}")
    write_summary(rows, out / "summary.csv")
    return 0 if failures == 0 else 1


def summarize(traces_dir, out_path=None, log=print) -> list:
    """Rebuild the summary table from persisted traces alone."""
    folder = Path(traces_dir)
    paths = sorted(p for p in folder.glob("*.jsonl"))
    if not paths:
        raise IoFailure(f"no trace files in {folder}")
    rows = []
    for path in paths:
        trace = read_trace(path)
        scenario = build_scenario(trace.meta["scenario"])
        rows.extend(summary_rows(trace, scenario))
    target = Path(out_path) if out_path is not None else folder / "summary.csv"
    write_summary(rows, target)
    log(f"{len(rows)} rows from {len(paths)} traces -> {target}")
    return rows
