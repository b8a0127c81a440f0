"""Episode trace persistence.

Line-delimited JSON: the first line is a header object with the resolved
scenario snapshot, operator descriptor and seed; an optional second header
carries live-session client metadata; every following line is one tick.
Floats serialize through repr and so round-trip bit-exactly.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import IoFailure, MalformedFrame
from .simulation import EpisodeTrace, TickRecord

RECORD_FIELDS = ("t", "pose", "twist", "u_h", "u_r",
                 "alpha", "p", "cond", "prior", "phi")


def _row(record: TickRecord) -> dict:
    row = {"t": record.t}
    for name in RECORD_FIELDS[1:]:
        row[name] = [float(v) for v in getattr(record, name)]
    return row


def _record(row: dict) -> TickRecord:
    try:
        return TickRecord(
            t=float(row["t"]),
            **{name: np.asarray(row[name], dtype=float) for name in RECORD_FIELDS[1:]},
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedFrame(f"bad trace record: {exc}") from exc


def write_trace(trace: EpisodeTrace, path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            header = dict(trace.meta)
            client = header.pop("client", None)
            fh.write(json.dumps(header) + "\n")
            if client is not None:
                fh.write(json.dumps({"kind": "client_metadata", **client}) + "\n")
            for record in trace.records:
                fh.write(json.dumps(_row(record)) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write trace {path}: {exc}") from exc


def read_trace(path) -> EpisodeTrace:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [line for line in fh.read().splitlines() if line.strip()]
    except OSError as exc:
        raise IoFailure(f"cannot read trace {path}: {exc}") from exc
    if not lines:
        raise MalformedFrame(f"empty trace file {path}")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise MalformedFrame(f"bad trace header: {exc}") from exc
    if not isinstance(header, dict) or header.get("kind") != "episode_trace":
        raise MalformedFrame("first line must be an episode_trace header")
    body = lines[1:]
    if body:
        try:
            probe = json.loads(body[0])
        except json.JSONDecodeError as exc:
            raise MalformedFrame(f"bad trace line: {exc}") from exc
        if isinstance(probe, dict) and probe.get("kind") == "client_metadata":
            header["client"] = {k: v for k, v in probe.items() if k != "kind"}
            body = body[1:]
    trace = EpisodeTrace(meta=header)
    for line in body:
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedFrame(f"bad trace line: {exc}") from exc
        trace.records.append(_record(row))
    return trace
