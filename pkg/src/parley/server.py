"""WebSocket service exposing one live session.

Protocol version 1: text frames, each a JSON object with a "type" field.
Client -> server: hello, segment, manual_select, reorder, create_tag,
request_summary, hover_expand, pause, timer_tick.
Server -> client: snapshot, delta, suggestion, error.
Schema details live in docs/formats.md.
"""

from __future__ import annotations

import json
import time

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .config import EngineConfig
from .session import PROTOCOL_VERSION, Session, input_event

# client message type -> engine event kind
_CLIENT_EVENTS = {
    "segment": "segment",
    "manual_select": "manual_select",
    "reorder": "reorder",
    "create_tag": "create_tag",
    "delete_tag": "delete_tag",
    "request_summary": "request_summary",
    "hover_expand": "hover_expand",
    "pause": "pause",
    "timer_tick": "timer_tick",
}


def create_app(script_text: str, config: EngineConfig | None = None,
               gateway=None, log_path: str | None = None) -> FastAPI:
    app = FastAPI(title="parley")
    session = Session(script_text, config, gateway)
    if log_path:
        sink = open(log_path, "a")
        session.attach_log_sink(sink)
    app.state.session = session
    clients: list[WebSocket] = []
    started_at = time.monotonic()

    def virtual_now() -> float:
        return time.monotonic() - started_at

    async def broadcast(message: dict) -> None:
        text = json.dumps(message, sort_keys=True)
        for ws in list(clients):
            try:
                await ws.send_text(text)
            except Exception:
                clients.remove(ws)

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        clients.append(ws)
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await ws.send_text(json.dumps(
                        {"type": "error", "message": "not valid JSON"},
                        sort_keys=True))
                    continue
                mtype = msg.get("type")
                if mtype == "hello":
                    session.apply(input_event(
                        "client_connect", msg.get("t", virtual_now()),
                        {"client_id": msg.get("client_id", "anon")}))
                    await ws.send_text(json.dumps(
                        {"type": "snapshot", "protocol": PROTOCOL_VERSION,
                         "state": session.snapshot()}, sort_keys=True))
                    continue
                if mtype not in _CLIENT_EVENTS:
                    await ws.send_text(json.dumps(
                        {"type": "error",
                         "message": f"unknown message type {mtype!r}"},
                        sort_keys=True))
                    continue
                t = float(msg.get("t", virtual_now()))
                payload = {k: v for k, v in msg.items()
                           if k not in ("type", "t")}
                derived = session.apply(input_event(
                    _CLIENT_EVENTS[mtype], t, payload))
                for ev in derived:
                    if ev.kind == "suggestion":
                        await broadcast({"type": "suggestion",
                                         "event": json.loads(ev.to_json())})
                    elif ev.kind == "error":
                        await ws.send_text(json.dumps(
                            {"type": "error",
                             "message": ev.payload.get("message", "")},
                            sort_keys=True))
                # some inputs (reorder, pause) change state without derived
                # events, so every applied message re-broadcasts the view
                await broadcast({"type": "snapshot",
                                 "protocol": PROTOCOL_VERSION,
                                 "state": session.snapshot()})
        except WebSocketDisconnect:
            if ws in clients:
                clients.remove(ws)

    @app.get("/snapshot")
    def get_snapshot():
        return {"type": "snapshot", "protocol": PROTOCOL_VERSION,
                "state": session.snapshot()}

    return app
