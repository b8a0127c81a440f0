"""Live bridge: one interactive episode served over HTTP + websocket.

A single session owns the simulation; network readers only deposit the
newest input frame into a one-slot mailbox that the tick loop consumes
(last write wins, stale inputs zeroed by the dead-man rule).  In lockstep
mode there is no wall clock: each accepted input frame advances exactly one
tick and every tick is broadcast, which makes wire sessions reproducible
tick-for-tick.
"""

from __future__ import annotations

import asyncio
import contextlib
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from pydantic import BaseModel

from .errors import (BadParams, ClientProtocolError, ConfigParse, Diverged,
                     MalformedFrame, PortBusy)
from .geometry import chart_apply
from .metrics import compute_effort, task_intervals
from .operators import make_operator
from .scenario import Scenario, validate_config
from .simulation import CompletionTracker, EpisodeTrace, Stepper, run_episode
from .tracefile import write_trace
from .wire import InstructionFrame, StateFrame, TargetEntry, decode_frame, encode_frame


class EpisodeRequest(BaseModel):
    operator: str = "perfect"
    seed: int = 0
    noise_std: float = 0.2
    max_duration: Optional[float] = None


class EpisodeReport(BaseModel):
    operator: str
    seed: int
    ticks: int
    tasks_completed: int
    final_alpha: list
    effort: float
    diverged: bool


class ValidationVerdict(BaseModel):
    valid: bool
    field: Optional[str] = None
    message: Optional[str] = None


class TeleopSession:
    def __init__(self, scenario: Scenario, lockstep: bool = False,
                 trace_path=None, max_duration: Optional[float] = None):
        self.scenario = scenario
        self.lockstep = lockstep
        self.trace_path = trace_path
        self.horizon = scenario.sim.max_duration if max_duration is None else max_duration
        self.stepper = Stepper(scenario)
        self.trace = EpisodeTrace(meta={
            "schema": 1,
            "kind": "episode_trace",
            "scenario": scenario.config,
            "operator": {"kind": "live", "lockstep": lockstep},
            "seed": 0,
        })
        self.deadman_ticks = max(1, int(round(scenario.service.deadman_timeout
                                              / scenario.sim.dt)))
        self.mailbox = None            # (u 3-vector, tick stamp)
        self.last_sequence = -1
        self.clients: list = []
        self.operator_ws: Optional[WebSocket] = None
        self.operator_name: Optional[str] = None
        self.input_frames = 0
        self.active_index = 0
        self.tracker = CompletionTracker(scenario.targets[0], scenario)
        self.finished = False
        self.diverged = False
        self._targets = [
            TargetEntry(pose=[float(v) for v in np.concatenate(
                [t.pose.position, t.pose.orientation])], mode=t.mode)
            for t in scenario.targets
        ]

    # ------------------------------------------------------------- framing

    def state_frame(self) -> StateFrame:
        state = self.stepper.state
        last = self.trace.records[-1] if self.trace.records else None
        n = self.scenario.n_mission
        coords = chart_apply(self.scenario.human_chart, state.pose)
        return StateFrame(
            t=state.time,
            pose=[float(v) for v in np.concatenate([state.pose.position,
                                                    state.pose.orientation])],
            surface_coords=[float(v) for v in coords],
            twist=[float(v) for v in state.twist.as_vector()],
            alpha=[float(v) for v in self.stepper.alpha],
            likelihood=[float(v) for v in (last.p if last is not None else np.zeros(n))],
            conditional=[float(v) for v in (last.cond if last is not None else np.zeros(n))],
            prior=[float(v) for v in (last.prior if last is not None else np.zeros(n))],
            active_target=self.active_index,
            target_list=self._targets,
            distance_to_surface=float(
                self.scenario.cylinder.frame_at(state.pose.position).d),
        )

    def instruction_frame(self) -> InstructionFrame:
        target = self.scenario.targets[min(self.active_index,
                                           len(self.scenario.targets) - 1)]
        return InstructionFrame(
            active_target=self.active_index,
            mode=target.mode,
            text=f"target {self.active_index + 1}: hold the {target.mode} "
                 f"viewpoint within tolerance",
        )

    # ------------------------------------------------------------ stepping

    def current_input(self) -> np.ndarray:
        if self.mailbox is None:
            return np.zeros(3)
        u, stamp = self.mailbox
        if self.stepper.ticks - stamp > self.deadman_ticks:
            return np.zeros(3)
        return u

    def accept_input(self, u, sequence: int) -> bool:
        if sequence <= self.last_sequence:
            return False
        self.last_sequence = sequence
        self.mailbox = (np.asarray(u, dtype=float).reshape(3), self.stepper.ticks)
        self.input_frames += 1
        return True

    def tick(self) -> bool:
        """Advance one step; returns True while the session should continue."""
        if self.finished:
            return False
        try:
            record = self.stepper.tick(self.current_input())
        except Diverged:
            self.diverged = True
            self.finished = True
            return False
        self.trace.records.append(record)
        advanced = False
        if self.active_index < len(self.scenario.targets):
            if self.tracker.update(self.stepper.state.pose):
                self.active_index += 1
                advanced = True
                if self.active_index >= len(self.scenario.targets):
                    self.finished = True
                else:
                    self.tracker = CompletionTracker(
                        self.scenario.targets[self.active_index], self.scenario)
        if self.stepper.state.time >= self.horizon:
            self.finished = True
        self._advanced = advanced
        return not self.finished

    # ---------------------------------------------------------- lifecycle

    def write_session_trace(self) -> None:
        if self.trace_path is None:
            return
        meta = dict(self.trace.meta)
        meta["client"] = {
            "role": "operator" if self.operator_name is not None else "none",
            "name": self.operator_name,
            "input_frames": self.input_frames,
        }
        self.trace.meta = meta
        write_trace(self.trace, self.trace_path)


async def _broadcast(session: TeleopSession, text: str) -> None:
    for ws in list(session.clients):
        try:
            await ws.send_text(text)
        except Exception:
            with contextlib.suppress(ValueError):
                session.clients.remove(ws)


async def _broadcast_state(session: TeleopSession) -> None:
    await _broadcast(session, encode_frame("state", session.state_frame()))
    if getattr(session, "_advanced", False):
        await _broadcast(session, encode_frame("instruction", session.instruction_frame()))
        session._advanced = False


async def _run_realtime(session: TeleopSession) -> None:
    dt = session.scenario.sim.dt
    every = session.scenario.service.broadcast_every
    loop = asyncio.get_event_loop()
    # absolute deadlines, so tick compute time does not stretch the period
    deadline = loop.time() + dt
    try:
        while True:
            alive = session.tick()
            if session.stepper.ticks % every == 0:
                await _broadcast_state(session)
            if not alive:
                break
            now = loop.time()
            deadline += dt
            if deadline < now - 0.25:
                deadline = now + dt  # fell far behind; drop the backlog
            await asyncio.sleep(max(0.0, deadline - now))
    except asyncio.CancelledError:
        pass
    finally:
        session.write_session_trace()


def create_app(scenario: Scenario, lockstep: bool = False, trace_path=None,
               max_duration: Optional[float] = None) -> FastAPI:
    session = TeleopSession(scenario, lockstep=lockstep, trace_path=trace_path,
                            max_duration=max_duration)

    @contextlib.asynccontextmanager
    async def lifespan(_: FastAPI):
        task = None
        if not session.lockstep:
            task = asyncio.create_task(_run_realtime(session))
        yield
        if task is not None:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task
        else:
            session.write_session_trace()

    app = FastAPI(title="rmpadapt live bridge", lifespan=lifespan)
    app.state.session = session

    @app.get("/health")
    async def health() -> dict:
        return {"status": "ok", "ticks": session.stepper.ticks,
                "finished": session.finished, "diverged": session.diverged}

    @app.get("/scenario")
    async def scenario_doc() -> dict:
        return {"config": scenario.config,
                "policy_names": scenario.policy_names(),
                "targets": [t.model_dump() for t in session._targets]}

    @app.post("/validate")
    async def validate(config: dict) -> ValidationVerdict:
        try:
            validate_config(config)
        except ConfigParse as exc:
            return ValidationVerdict(valid=False, field=exc.field, message=str(exc))
        return ValidationVerdict(valid=True)

    @app.post("/episodes")
    async def episodes(request: EpisodeRequest) -> EpisodeReport:
        try:
            operator = make_operator(request.operator, noise_std=request.noise_std)
        except BadParams as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        diverged = False
        try:
            trace = await asyncio.to_thread(
                run_episode, scenario, operator, request.seed,
                max_duration=request.max_duration)
        except Diverged:
            return EpisodeReport(operator=request.operator, seed=request.seed,
                                 ticks=0, tasks_completed=0, final_alpha=[],
                                 effort=0.0, diverged=True)
        done = sum(1 for i in task_intervals(trace, scenario)
                   if i.completion_tick is not None)
        return EpisodeReport(
            operator=request.operator, seed=request.seed, ticks=len(trace),
            tasks_completed=done,
            final_alpha=[float(v) for v in trace.records[-1].alpha],
            effort=compute_effort(trace), diverged=diverged)

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket) -> None:
        await websocket.accept()
        session.clients.append(websocket)
        is_operator = False
        try:
            while True:
                text = await websocket.receive_text()
                try:
                    frame_type, payload = decode_frame(text)
                except MalformedFrame as exc:
                    raise ClientProtocolError(str(exc)) from exc
                if frame_type == "hello":
                    if payload.role == "operator" and session.operator_ws is None:
                        session.operator_ws = websocket
                        session.operator_name = payload.name
                        is_operator = True
                    await websocket.send_text(
                        encode_frame("instruction", session.instruction_frame()))
                    await websocket.send_text(
                        encode_frame("state", session.state_frame()))
                elif frame_type == "input":
                    if not is_operator:
                        raise ClientProtocolError("only the operator may send inputs")
                    accepted = session.accept_input(payload.u_h, payload.sequence)
                    if accepted and session.lockstep and not session.finished:
                        session.tick()
                        await _broadcast_state(session)
                else:
                    raise ClientProtocolError(f"clients never send '{frame_type}' frames")
        except WebSocketDisconnect:
            pass
        except ClientProtocolError:
            pass  # disconnect the offending client only; session continues
        finally:
            with contextlib.suppress(ValueError):
                session.clients.remove(websocket)
            if session.operator_ws is websocket:
                session.operator_ws = None
            with contextlib.suppress(RuntimeError):
                await websocket.close()

    return app


def serve(scenario: Scenario, host: str = "127.0.0.1", port: int = 8734,
          trace_path=None) -> None:
    import uvicorn

    app = create_app(scenario, trace_path=trace_path)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except OSError as exc:
        raise PortBusy(f"cannot bind {host}:{port}: {exc}") from exc
