"""HTTP + WebSocket service exposing live agent sessions.

One engine per session, actor style: a per-session lock serializes every
touch of the engine, WebSocket fan-out only reads the event outbox. The
stream replays from a client cursor so reconnects lose nothing.
"""

from __future__ import annotations

import asyncio
import json
import threading
import time
import uuid
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Any, Optional

import anyio
from fastapi import FastAPI, HTTPException, Query, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from .engine import Engine, EngineConfig
from .errors import CtemError, InvalidProfileError, ValidationError
from .interaction import familiarity_band
from .state import MotivationalVector, load_profile, tone_labels


class Session:
    def __init__(self, session_id: str, persona_name: str, engine: Engine):
        self.id = session_id
        self.persona_name = persona_name
        self.engine = engine
        self.created_at = time.time()
        self.last_active = self.created_at
        self.persisted_at = 0.0
        self.lock = threading.Lock()
        self.generation_in_flight = False
        self.wakeups: list[tuple[asyncio.AbstractEventLoop, asyncio.Event]] = []
        self.tick_task: Optional[asyncio.Task] = None

    def touch(self) -> None:
        self.last_active = time.time()

    def notify(self) -> None:
        # May run on a worker thread; hop onto each listener's loop.
        for loop, event in self.wakeups:
            loop.call_soon_threadsafe(event.set)


class SessionManager:
    def __init__(self, config: EngineConfig):
        self.config = config
        self.sessions: dict[str, Session] = {}
        self.data_dir = Path(config.data_dir)

    def persona_path(self, name: str) -> Path:
        default_dir = Path(self.config.persona_path).parent
        candidate = default_dir / f"{name}.json"
        if candidate.exists():
            return candidate
        raise HTTPException(status_code=422, detail=f"unknown persona: {name}")

    def create(self, persona_name: Optional[str]) -> Session:
        config = EngineConfig.from_dict(self.config.to_dict())
        if persona_name:
            config.persona_path = str(self.persona_path(persona_name))
        engine = Engine(config)
        session = Session(uuid.uuid4().hex, persona_name or "default", engine)
        self.sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session

    def persist(self, session: Session) -> None:
        self.data_dir.mkdir(parents=True, exist_ok=True)
        with session.lock:
            session.engine.save_snapshot(self.data_dir / f"{session.id}.snapshot.json")
        session.persisted_at = time.time()
        self._write_index()

    def _write_index(self) -> None:
        index = [{"id": s.id, "persona": s.persona_name} for s in self.sessions.values()]
        (self.data_dir / "sessions.json").write_text(json.dumps(index), encoding="utf-8")

    def persist_all(self) -> None:
        for session in self.sessions.values():
            self.persist(session)
        if self.sessions:
            return
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._write_index()

    def persist_idle(self, idle_seconds: float) -> list[str]:
        """Snapshot sessions whose last activity predates their last snapshot."""
        persisted = []
        now = time.time()
        for session in self.sessions.values():
            if now - session.last_active >= idle_seconds and (
                session.persisted_at < session.last_active
            ):
                self.persist(session)
                persisted.append(session.id)
        return persisted

    def restore_all(self) -> None:
        index_path = self.data_dir / "sessions.json"
        if not index_path.exists():
            return
        for entry in json.loads(index_path.read_text("utf-8")):
            snap = self.data_dir / f"{entry['id']}.snapshot.json"
            if not snap.exists():
                continue
            config = EngineConfig.from_dict(self.config.to_dict())
            if entry["persona"] != "default":
                config.persona_path = str(self.persona_path(entry["persona"]))
            engine = Engine.load_snapshot(snap, config)
            self.sessions[entry["id"]] = Session(entry["id"], entry["persona"], engine)


def _step_locked(session: Session) -> None:
    with session.lock:
        session.generation_in_flight = True
        try:
            session.engine.step()
        finally:
            session.generation_in_flight = False
    session.notify()


def create_app(config: EngineConfig) -> FastAPI:
    manager = SessionManager(config)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        manager.restore_all()
        reaper: Optional[asyncio.Task] = None
        if config.session_idle_persist_seconds > 0:

            async def reap():
                interval = min(config.session_idle_persist_seconds, 5.0)
                while True:
                    await asyncio.sleep(interval)
                    await anyio.to_thread.run_sync(
                        manager.persist_idle, config.session_idle_persist_seconds
                    )

            reaper = asyncio.create_task(reap())
        yield
        if reaper:
            reaper.cancel()
        manager.persist_all()

    app = FastAPI(title="ctem service", lifespan=lifespan)
    app.state.manager = manager

    @app.exception_handler(CtemError)
    async def _ctem_error(_request: Request, exc: CtemError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/v1/healthz")
    async def healthz():
        return {"status": "ok"}

    @app.post("/v1/sessions", status_code=201)
    async def create_session(body: dict[str, Any]):
        session = manager.create(body.get("persona"))
        if config.service_tick_wall_seconds > 0:
            session.tick_task = asyncio.create_task(_tick_loop(session))
        return {"session_id": session.id}

    async def _tick_loop(session: Session):
        while session.id in manager.sessions:
            await asyncio.sleep(config.service_tick_wall_seconds)
            await anyio.to_thread.run_sync(_step_locked, session)

    @app.post("/v1/sessions/{session_id}/messages")
    async def post_message(session_id: str, body: dict[str, Any]):
        session = manager.get(session_id)
        text = body.get("text")
        if not isinstance(text, str) or not text:
            raise HTTPException(status_code=422, detail="text must be a non-empty string")
        message_id = uuid.uuid4().hex
        session.touch()

        def enqueue_and_step():
            with session.lock:
                session.generation_in_flight = True
                try:
                    session.engine.enqueue_message(text)
                    session.engine.step()
                finally:
                    session.generation_in_flight = False
            session.notify()

        await anyio.to_thread.run_sync(enqueue_and_step)
        return {"message_id": message_id}

    @app.get("/v1/sessions/{session_id}/state")
    async def get_state(session_id: str, debug: int = Query(default=0)):
        session = manager.get(session_id)
        engine = session.engine
        with session.lock:
            tone = tone_labels(engine.state.physio)
            present = engine.inventory.present
            view: dict[str, Any] = {
                "tone_labels": {
                    "energy": tone.energy,
                    "valence": tone.valence,
                    "arousal": tone.arousal,
                },
                "familiarity_band": familiarity_band(
                    engine.state.familiarity,
                    config.familiarity_stranger_max,
                    config.familiarity_close_min,
                ),
                "current_behavior": present.behavior.label if present else None,
            }
            if debug and config.debug:
                view["debug"] = {
                    "physio": engine.state.physio.to_dict(),
                    "familiarity": engine.state.familiarity,
                    "tick": engine.tick,
                    "sim_time": engine.sim_time,
                    "turn_count": len(engine.memory.turns),
                    "user_turn_count": sum(
                        1 for t in engine.memory.turns if t.speaker == "user"
                    ),
                    "last_feedback": (
                        engine.last_feedback.to_dict() if engine.last_feedback else None
                    ),
                    "event_seq": engine.event_seq,
                }
        return view

    @app.post("/v1/sessions/{session_id}/advance")
    async def advance(session_id: str, body: dict[str, Any]):
        if not config.debug:
            raise HTTPException(status_code=404, detail="not found")
        session = manager.get(session_id)
        ticks = int(body.get("ticks", 1))
        session.touch()

        def run_ticks():
            for _ in range(ticks):
                _step_locked(session)

        await anyio.to_thread.run_sync(run_ticks)
        return {"tick": session.engine.tick}

    @app.get("/v1/sessions/{session_id}/timeline")
    async def get_timeline(session_id: str):
        session = manager.get(session_id)
        with session.lock:
            posts = [p.to_dict() for p in reversed(session.engine.timeline)]
        return {"posts": posts}

    @app.post(
        "/v1/sessions/{session_id}/timeline/{post_id}/reactions", status_code=204
    )
    async def react(session_id: str, post_id: int, body: dict[str, Any]):
        session = manager.get(session_id)
        kind = body.get("kind")
        if kind not in ("like", "comment"):
            raise HTTPException(status_code=422, detail="kind must be like or comment")
        session.touch()

        def apply_reaction():
            with session.lock:
                engine = session.engine
                post = next((p for p in engine.timeline if p.id == post_id), None)
                if post is None:
                    raise HTTPException(status_code=404, detail="unknown post")
                post.reactions.append(
                    {"kind": kind, "text": body.get("text"), "at": engine.sim_time}
                )
                engine.enqueue_reaction("like" if kind == "like" else "comment", post_id=post_id)
                session.generation_in_flight = True
                try:
                    engine.step()
                finally:
                    session.generation_in_flight = False
            session.notify()

        await anyio.to_thread.run_sync(apply_reaction)
        return None

    @app.get("/v1/sessions/{session_id}/persona")
    async def get_persona(session_id: str):
        session = manager.get(session_id)
        with session.lock:
            return session.engine.profile.to_dict()

    @app.put("/v1/sessions/{session_id}/persona")
    async def put_persona(session_id: str, body: dict[str, Any]):
        session = manager.get(session_id)
        if session.generation_in_flight:
            raise HTTPException(status_code=409, detail="generation in flight")
        allowed = {"character_notes", "baseline_motivation"}
        unknown = set(body) - allowed
        if unknown:
            raise HTTPException(
                status_code=422, detail=f"unknown persona fields: {sorted(unknown)}"
            )
        session.touch()
        with session.lock:
            if session.generation_in_flight:
                raise HTTPException(status_code=409, detail="generation in flight")
            engine = session.engine
            notes = body.get("character_notes", engine.profile.character_notes)
            try:
                motivation = (
                    MotivationalVector.from_dict(body["baseline_motivation"])
                    if "baseline_motivation" in body
                    else engine.profile.baseline_motivation
                )
                motivation.validate()
                engine.replace_persona(str(notes), motivation)
            except (ValidationError, InvalidProfileError) as exc:
                field = getattr(exc, "field", None)
                raise HTTPException(
                    status_code=422,
                    detail={"message": str(exc), "field": field},
                )
        return engine.profile.to_dict()

    @app.websocket("/v1/sessions/{session_id}/stream")
    async def ws_stream(websocket: WebSocket, session_id: str):
        session = manager.sessions.get(session_id)
        if session is None:
            await websocket.close(code=4404)
            return
        await websocket.accept()
        cursor = int(websocket.query_params.get("cursor", 0))
        wakeup = asyncio.Event()
        listener = (asyncio.get_running_loop(), wakeup)
        session.wakeups.append(listener)
        try:
            while True:
                with session.lock:
                    events = [e for e in session.engine.outbox if e["seq"] > cursor]
                for event in events:
                    await websocket.send_json(event)
                    cursor = event["seq"]
                wakeup.clear()
                try:
                    await asyncio.wait_for(
                        wakeup.wait(), timeout=config.heartbeat_seconds
                    )
                except asyncio.TimeoutError:
                    await websocket.send_json({"type": "heartbeat"})
        except WebSocketDisconnect:
            pass
        finally:
            if listener in session.wakeups:
                session.wakeups.remove(listener)

    return app
