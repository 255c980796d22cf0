"""Live-steering HTTP/WebSocket service.

Sessions hold one runtime each. Steering frames arrive over a WebSocket: the
client sends either synergy coordinates or a full commanded posture, the
server applies exactly one drive step and replies with the authoritative
posture, per-finger chain positions, and the frozen joint set. Replies are a
pure function of session state and frame, so a recorded frame log replayed
against a fresh session reproduces the reply log exactly.

Sessions are independent and in-memory; within a session every state change
goes through one lock, so frames and phase switches are strictly serialized.
"""

from __future__ import annotations

import asyncio
import json
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .build import FDMSModel, FunctionAssignment
from .errors import FDMSError, NotFoundError
from .hand import HandModel, forward_kinematics, load_hand_model
from .switching import (
    Phase,
    RuntimeState,
    SynergyDatabase,
    TaskScript,
    Termination,
    base_model,
    begin_phase,
    drive_with_coefficients,
    drive_with_posture,
    script_from_dict,
    validate_script,
)
from .synergy import contribution_ratios


@dataclass
class Session:
    id: str
    state: RuntimeState
    script: TaskScript | None = None
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)
    stream_active: bool = False


def _fingertips(model: HandModel, posture) -> dict:
    chains = forward_kinematics(model, posture)
    return {
        finger.value: {
            "points": [[float(x), float(y)] for x, y in chain.points],
            "tip": [float(chain.tip[0]), float(chain.tip[1])],
        }
        for finger, chain in chains.items()
    }


def _synergy_info(session: Session, db: SynergyDatabase) -> dict | None:
    state = session.state
    if state.matrix is None or state.synergy_name is None:
        return None
    entry = db.lookup(state.synergy_name)
    base = base_model(entry.model)
    return {
        "name": entry.name,
        "kind": entry.kind.value,
        "label": entry.model.label if isinstance(entry.model, FDMSModel) else None,
        "n_s": state.matrix.n_s,
        "f": base.f,
        "ratios": [float(r) for r in contribution_ratios(base)],
        "subset": list(base.subset.indices),
    }


def _snapshot(session: Session, db: SynergyDatabase) -> dict:
    state = session.state
    return {
        "id": session.id,
        "posture": [float(v) for v in state.current_posture],
        "frozen": list(state.frozen_indices),
        "phase_index": state.phase_index,
        "synergy": _synergy_info(session, db),
        "fingertips": _fingertips(state.model, state.current_posture),
    }


def create_app(
    db: SynergyDatabase,
    model: HandModel,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="fdms steering service")
    sessions: dict[str, Session] = {}

    def get_session(session_id: str) -> Session:
        try:
            return sessions[session_id]
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")

    @app.get("/synergies")
    async def list_synergies() -> list[dict]:
        return [
            {
                "name": e.name,
                "kind": e.kind.value,
                "label": e.model.label if isinstance(e.model, FDMSModel) else None,
                "f": base_model(e.model).f,
            }
            for e in db.entries()
        ]

    @app.post("/sessions")
    async def create_session(body: dict | None = None) -> dict:
        body = body or {}
        hand = model
        if body.get("hand_model") is not None:
            try:
                hand = load_hand_model(body["hand_model"])
            except FDMSError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
        script = None
        if body.get("task_script") is not None:
            try:
                script = script_from_dict(body["task_script"], hand)
                validate_script(script, db)
            except FDMSError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
        session = Session(id=uuid.uuid4().hex, state=RuntimeState(hand), script=script)
        sessions[session.id] = session
        return {
            "id": session.id,
            "posture": [float(v) for v in session.state.current_posture],
            "joint_names": list(hand.joint_names),
            "fingers": {
                finger.value: list(idxs) for finger, idxs in hand.finger_joints.items()
            },
            "limits": {
                "lo": [j.limit_lo for j in hand.joints],
                "hi": [j.limit_hi for j in hand.joints],
            },
            "script": session.script.name if session.script else None,
            "fingertips": _fingertips(hand, session.state.current_posture),
        }

    @app.get("/sessions/{session_id}")
    async def session_snapshot(session_id: str) -> dict:
        session = get_session(session_id)
        async with session.lock:
            return _snapshot(session, db)

    @app.post("/sessions/{session_id}/phase")
    async def switch_phase(session_id: str, body: dict) -> dict:
        session = get_session(session_id)
        try:
            raw = body["assignment"]
            if isinstance(raw, str):
                assignment = FunctionAssignment.resolve(session.state.model, raw)
            else:
                assignment = FunctionAssignment.resolve(
                    session.state.model, raw["functions"], raw.get("joint_overrides")
                )
            phase = Phase(
                assignment=assignment,
                synergy=str(body["synergy"]),
                n_s=int(body["n_s"]),
                termination=Termination.external(),
            )
        except KeyError as exc:
            raise HTTPException(status_code=400, detail=f"missing field {exc.args[0]!r}")
        except FDMSError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        async with session.lock:
            try:
                begin_phase(session.state, phase, db)
            except NotFoundError as exc:
                raise HTTPException(status_code=404, detail=str(exc))
            except FDMSError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            return {
                "frozen": list(session.state.frozen_indices),
                "phase_index": session.state.phase_index,
                "synergy": _synergy_info(session, db),
                "coefficients": [float(v) for v in session.state.coefficients],
            }

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str) -> None:
        await websocket.accept()
        session = sessions.get(session_id)
        if session is None:
            await websocket.send_json({"error": f"unknown session {session_id!r}"})
            await websocket.close()
            return
        if session.stream_active:
            await websocket.send_json({"error": "session already has a steering client"})
            await websocket.close()
            return
        session.stream_active = True
        try:
            while True:
                text = await websocket.receive_text()
                try:
                    frame = json.loads(text)
                except json.JSONDecodeError as exc:
                    await websocket.send_json({"error": f"malformed JSON: {exc}"})
                    continue
                async with session.lock:
                    reply = _apply_frame(session, frame)
                await websocket.send_json(reply)
        except WebSocketDisconnect:
            pass
        finally:
            session.stream_active = False

    def _apply_frame(session: Session, frame) -> dict:
        state = session.state
        if not isinstance(frame, dict):
            return {"error": "frame must be a JSON object"}
        has_z = "z" in frame
        has_posture = "posture" in frame
        if has_z == has_posture:
            return {"error": "frame must carry exactly one of 'z' or 'posture'"}
        try:
            if has_z:
                posture = drive_with_coefficients(state, frame["z"])
            else:
                posture = drive_with_posture(state, frame["posture"])
        except FDMSError as exc:
            return {"error": str(exc)}
        except (TypeError, ValueError) as exc:
            return {"error": f"bad frame payload: {exc}"}
        return {
            "posture": [float(v) for v in posture],
            "fingertips": _fingertips(state.model, posture),
            "frozen": list(state.frozen_indices),
        }

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
