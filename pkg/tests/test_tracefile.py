from __future__ import annotations

import json

import numpy as np
import pytest

from rmpadapt.errors import IoFailure, MalformedFrame
from rmpadapt.operators import make_operator
from rmpadapt.simulation import run_episode
from rmpadapt.tracefile import RECORD_FIELDS, read_trace, write_trace


@pytest.fixture(scope="module")
def short_trace(ref_scenario):
    return run_episode(ref_scenario, make_operator("perfect"), seed=0,
                       max_duration=1.5)


class TestRoundTrip:
    def test_bit_exact(self, short_trace, tmp_path):
        path = tmp_path / "episode.jsonl"
        write_trace(short_trace, path)
        back = read_trace(path)
        assert len(back) == len(short_trace)
        assert back.meta == short_trace.meta
        for name in RECORD_FIELDS[1:]:
            assert np.array_equal(back.column(name), short_trace.column(name)), name
        assert [r.t for r in back.records] == [r.t for r in short_trace.records]

    def test_header_first_line(self, short_trace, tmp_path):
        path = tmp_path / "episode.jsonl"
        write_trace(short_trace, path)
        first = json.loads(path.read_text().splitlines()[0])
        assert first["kind"] == "episode_trace"
        assert first["seed"] == 0
        assert first["operator"] == {"kind": "perfect"}

    def test_one_line_per_tick(self, short_trace, tmp_path):
        path = tmp_path / "episode.jsonl"
        write_trace(short_trace, path)
        lines = path.read_text().splitlines()
        assert len(lines) == 1 + len(short_trace)

    def test_double_write_idempotent(self, short_trace, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_trace(short_trace, a)
        write_trace(read_trace(a), b)
        assert a.read_text() == b.read_text()


class TestClientMetadata:
    def test_second_header_line(self, short_trace, tmp_path):
        trace = short_trace
        trace.meta["client"] = {"role": "operator", "name": "console",
                                "input_frames": 42}
        path = tmp_path / "live.jsonl"
        try:
            write_trace(trace, path)
            lines = path.read_text().splitlines()
            second = json.loads(lines[1])
            assert second["kind"] == "client_metadata"
            assert second["role"] == "operator"
            back = read_trace(path)
            assert back.meta["client"] == trace.meta["client"]
            assert len(back) == len(trace)
        finally:
            trace.meta.pop("client", None)

    def test_absent_when_not_live(self, short_trace, tmp_path):
        path = tmp_path / "episode.jsonl"
        write_trace(short_trace, path)
        second = json.loads(path.read_text().splitlines()[1])
        assert second.get("kind") != "client_metadata"
        assert "client" not in read_trace(path).meta


class TestMalformed:
    def test_missing_file(self, tmp_path):
        with pytest.raises(IoFailure):
            read_trace(tmp_path / "ghost.jsonl")

    def test_empty_file(self, tmp_path):
        p = tmp_path / "empty.jsonl"
        p.write_text("")
        with pytest.raises(MalformedFrame):
            read_trace(p)

    def test_garbage_header(self, tmp_path):
        p = tmp_path / "bad.jsonl"
        p.write_text("{not json\n")
        with pytest.raises(MalformedFrame):
            read_trace(p)

    def test_wrong_header_kind(self, tmp_path):
        p = tmp_path / "bad.jsonl"
        p.write_text(json.dumps({"kind": "something_else"}) + "\n")
        with pytest.raises(MalformedFrame):
            read_trace(p)

    def test_garbage_record_line(self, short_trace, tmp_path):
        p = tmp_path / "bad.jsonl"
        write_trace(short_trace, p)
        p.write_text(p.read_text() + "][\n")
        with pytest.raises(MalformedFrame):
            read_trace(p)

    def test_record_missing_field(self, short_trace, tmp_path):
        p = tmp_path / "bad.jsonl"
        write_trace(short_trace, p)
        lines = p.read_text().splitlines()
        row = json.loads(lines[1])
        del row["alpha"]
        lines[1] = json.dumps(row)
        p.write_text("\n".join(lines) + "\n")
        with pytest.raises(MalformedFrame):
            read_trace(p)

    def test_unwritable_path(self, short_trace, tmp_path):
        with pytest.raises(IoFailure):
            write_trace(short_trace, tmp_path / "no" / "such" / "dir.jsonl")
