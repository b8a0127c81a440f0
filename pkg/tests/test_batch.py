from __future__ import annotations

import csv
import math

import numpy as np
import pytest
import yaml

from rmpadapt.batch import (
    SUMMARY_COLUMNS,
    run_batch,
    summarize,
    summary_rows,
    trace_filename,
    write_summary,
)
from rmpadapt.errors import IoFailure
from rmpadapt.metrics import compute_effort, compute_pose_errors
from rmpadapt.operators import make_operator
from rmpadapt.scenario import reference_config
from rmpadapt.simulation import run_episode
from rmpadapt.tracefile import write_trace


@pytest.fixture(scope="module")
def config_file(tmp_path_factory):
    p = tmp_path_factory.mktemp("cfg") / "reference.yaml"
    p.write_text(yaml.safe_dump(reference_config()))
    return p


@pytest.fixture(scope="module")
def replay_source(ref_scenario, tmp_path_factory):
    """A short recorded episode used to drive fast replay batches."""
    trace = run_episode(ref_scenario, make_operator("perfect"), seed=0,
                        max_duration=1.0)
    p = tmp_path_factory.mktemp("src") / "source.jsonl"
    write_trace(trace, p)
    return p


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestSummaryRows:
    def test_one_row_per_task(self, ref_scenario, perfect_trace):
        rows = summary_rows(perfect_trace, ref_scenario)
        assert [r["task"] for r in rows] == list(range(6))
        assert all(r["seed"] == 0 for r in rows)

    def test_values_match_direct_metrics(self, ref_scenario, perfect_trace):
        rows = summary_rows(perfect_trace, ref_scenario)
        effort = compute_effort(perfect_trace)
        for task, row in enumerate(rows):
            trans, rot = compute_pose_errors(perfect_trace, task, ref_scenario)
            assert row["trans_err_m"] == trans
            assert row["rot_err_rad"] == rot
            assert row["effort"] == effort

    def test_unreached_tasks_are_nan(self, ref_scenario):
        trace = run_episode(ref_scenario, make_operator("idle"), seed=0,
                            max_duration=1.0)
        rows = summary_rows(trace, ref_scenario)
        assert all(math.isnan(r["completion_s"]) for r in rows)


class TestWriteSummary:
    def test_csv_round_trips_floats_exactly(self, ref_scenario, perfect_trace,
                                            tmp_path):
        rows = summary_rows(perfect_trace, ref_scenario)
        path = tmp_path / "summary.csv"
        write_summary(rows, path)
        back = read_csv(path)
        assert list(back[0].keys()) == list(SUMMARY_COLUMNS)
        for orig, parsed in zip(rows, back):
            assert float(parsed["trans_err_m"]) == orig["trans_err_m"]
            assert float(parsed["effort"]) == orig["effort"]
            assert int(parsed["task"]) == orig["task"]

    def test_unwritable_path(self, ref_scenario, perfect_trace, tmp_path):
        rows = summary_rows(perfect_trace, ref_scenario)
        with pytest.raises(IoFailure):
            write_summary(rows, tmp_path / "no" / "dir.csv")


class TestRunBatch:
    def test_replay_batch_writes_traces_and_summary(self, config_file,
                                                    replay_source, tmp_path):
        out = tmp_path / "out"
        logs = []
        rc = run_batch(config_file, "replay", 2, out,
                       replay_trace=replay_source, log=logs.append)
        assert rc == 0
        assert (out / trace_filename(0)).exists()
        assert (out / trace_filename(1)).exists()
        assert len(read_csv(out / "summary.csv")) == 12
        assert len(logs) == 2 and all("2 tasks" in m or "tasks" in m for m in logs)

    def test_replay_needs_source(self, config_file, tmp_path):
        with pytest.raises(IoFailure):
            run_batch(config_file, "replay", 1, tmp_path / "out")

    def test_diverged_episode_reported(self, tmp_path):
        cfg = reference_config()
        cfg["sim"]["speed_fuse"] = 0.005    # trips on the first transit
        p = tmp_path / "fragile.yaml"
        p.write_text(yaml.safe_dump(cfg))
        logs = []
        rc = run_batch(p, "perfect", 1, tmp_path / "out", log=logs.append)
        assert rc == 1
        assert any("DIVERGED" in m for m in logs)
        assert read_csv(tmp_path / "out" / "summary.csv") == []


class TestSummarize:
    def test_recomputed_rows_match_in_run(self, config_file, replay_source,
                                          tmp_path):
        out = tmp_path / "out"
        run_batch(config_file, "replay", 1, out, replay_trace=replay_source,
                  log=lambda *_: None)
        first = (out / "summary.csv").read_bytes()
        rows = summarize(out, log=lambda *_: None)
        assert len(rows) == 6
        assert (out / "summary.csv").read_bytes() == first

    def test_custom_output_path(self, config_file, replay_source, tmp_path):
        out = tmp_path / "out"
        run_batch(config_file, "replay", 1, out, replay_trace=replay_source,
                  log=lambda *_: None)
        target = tmp_path / "elsewhere.csv"
        summarize(out, out_path=target, log=lambda *_: None)
        assert target.exists()

    def test_empty_dir_rejected(self, tmp_path):
        with pytest.raises(IoFailure):
            summarize(tmp_path)
