"""Wire protocol for the live bridge.

Text frames, one JSON envelope per message: {"type": ..., "payload": {...}}
with four frame types.  Floats serialize via repr, so a decoded frame
re-encodes to an equivalent frame bit-for-bit.
"""

from __future__ import annotations

import json
import math
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import MalformedFrame

FRAME_TYPES = ("state", "input", "hello", "instruction")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


def _finite(values, where: str):
    flat = values if isinstance(values, (list, tuple)) else [values]
    for v in flat:
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise ValueError(f"{where} must be finite numbers")
    return values


class TargetEntry(_Strict):
    pose: List[float] = Field(min_length=7, max_length=7)
    mode: str


class StateFrame(_Strict):
    t: float
    pose: List[float] = Field(min_length=7, max_length=7)
    surface_coords: List[float] = Field(min_length=3, max_length=3)
    twist: List[float] = Field(min_length=6, max_length=6)
    alpha: List[float]
    likelihood: List[float]
    conditional: List[float]
    prior: List[float]
    active_target: int
    target_list: List[TargetEntry]
    distance_to_surface: float

    @field_validator("pose", "surface_coords", "twist", "alpha",
                     "likelihood", "conditional", "prior")
    @classmethod
    def _check_numbers(cls, v, info):
        return _finite(v, info.field_name)


class InputFrame(_Strict):
    u_h: List[float] = Field(min_length=3, max_length=3)
    client_time: float
    sequence: int

    @field_validator("u_h")
    @classmethod
    def _check_u(cls, v):
        return _finite(v, "u_h")


class HelloFrame(_Strict):
    role: Literal["operator", "observer"]
    name: Optional[str] = None


class InstructionFrame(_Strict):
    active_target: int
    mode: str
    text: str


PAYLOAD_MODELS = {
    "state": StateFrame,
    "input": InputFrame,
    "hello": HelloFrame,
    "instruction": InstructionFrame,
}


def encode_frame(frame_type: str, payload) -> str:
    if frame_type not in PAYLOAD_MODELS:
        raise MalformedFrame(f"unknown frame type '{frame_type}'")
    if isinstance(payload, BaseModel):
        payload = payload.model_dump()
    return json.dumps({"type": frame_type, "payload": payload})


def decode_frame(text: str):
    """-> (type, payload model); raises MalformedFrame on anything else."""
    try:
        envelope = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise MalformedFrame(f"not valid JSON: {exc}") from exc
    if not isinstance(envelope, dict):
        raise MalformedFrame("envelope must be an object")
    frame_type = envelope.get("type")
    if frame_type not in PAYLOAD_MODELS:
        raise MalformedFrame(f"unknown frame type '{frame_type}'")
    payload = envelope.get("payload")
    if not isinstance(payload, dict) or not payload:
        raise MalformedFrame("payload must be a non-empty object")
    try:
        return frame_type, PAYLOAD_MODELS[frame_type](**payload)
    except ValidationError as exc:
        raise MalformedFrame(f"bad {frame_type} payload: {exc}") from exc
