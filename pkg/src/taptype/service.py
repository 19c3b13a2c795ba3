"""Local HTTP service exposing the engine to the demo keyboard.

Endpoints (JSON bodies throughout):

    GET  /layout                     -> the layout document (raw asset bytes)
    POST /sessions                   -> {"session_id": ...}; body may carry
                                        {"params": {...}, "profile": {...}}
    POST /sessions/{id}/decode       -> DecodeResult document
    POST /sessions/{id}/commit       -> {"trained", "skipped", "rebuilt", "commits"}
    GET  /sessions/{id}/model        -> model debug document
    POST /sessions/{id}/config       -> {"ok": true, "rebuilt": bool}
    GET  /sessions/{id}/profile      -> touch-history profile document

Each session owns one engine behind a lock: decodes are pure reads of the
current model snapshot, commits are serialized per session.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import replace

from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel, Field

from .decoder import EngineConfig, TypingEngine
from .langmodel import WordLM, default_lm
from .layout import KeyboardLayout, TouchPoint, qwerty_asset_text, qwerty_layout
from .spatial import SpatialParams
from .touch_store import TouchHistory


class TouchBody(BaseModel):
    x: float
    y: float


class DecodeBody(BaseModel):
    touches: list[TouchBody]


class CommitBody(BaseModel):
    word: str
    touches: list[TouchBody]


class ConfigBody(BaseModel):
    sigma0: float | None = Field(default=None)
    substitution_cost: float | None = None
    insertion_cost: float | None = None
    deletion_cost: float | None = None
    transposition_cost: float | None = None
    covariance_enabled: bool | None = None


class SessionBody(BaseModel):
    params: ConfigBody | None = None
    profile: dict | None = None


class _Session:
    def __init__(self, engine: TypingEngine):
        self.engine = engine
        self.lock = threading.Lock()


def create_app(
    layout: KeyboardLayout | None = None,
    lm: WordLM | None = None,
    layout_text: str | None = None,
    lexicon_top_n: int | None = None,
    static_dir: str | None = None,
) -> FastAPI:
    layout = layout or qwerty_layout()
    lm = lm or default_lm(lexicon_top_n)
    layout_text = layout_text if layout_text is not None else qwerty_asset_text()
    app = FastAPI(title="taptype demo service")
    sessions: dict[str, _Session] = {}

    def get_session(session_id: str) -> _Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session

    @app.get("/layout")
    def get_layout() -> Response:
        return Response(content=layout_text, media_type="application/json")

    @app.post("/sessions")
    def create_session(body: SessionBody | None = None) -> dict:
        config = EngineConfig()
        if body is not None and body.params is not None:
            try:
                config.params = _merge_params(config.params, body.params)
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
        engine = TypingEngine(config, layout, lm)
        if body is not None and body.profile is not None:
            try:
                engine.history = TouchHistory.from_document(body.profile)
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=f"bad profile: {exc}")
            engine.rebuild()
        session_id = uuid.uuid4().hex
        sessions[session_id] = _Session(engine)
        return {"session_id": session_id}

    @app.post("/sessions/{session_id}/decode")
    def post_decode(session_id: str, body: DecodeBody) -> dict:
        session = get_session(session_id)
        if not body.touches:
            raise HTTPException(status_code=422, detail="need at least one touch")
        touches = [TouchPoint(t.x, t.y) for t in body.touches]
        with session.lock:
            result = session.engine.decode(touches)
        return result.to_document()

    @app.post("/sessions/{session_id}/commit")
    def post_commit(session_id: str, body: CommitBody) -> dict:
        session = get_session(session_id)
        touches = [TouchPoint(t.x, t.y) for t in body.touches]
        with session.lock:
            summary = session.engine.commit(body.word, touches)
            commits = session.engine.commit_count
        return {
            "trained": summary.trained,
            "skipped": summary.skipped,
            "rebuilt": summary.rebuilt,
            "commits": commits,
        }

    @app.get("/sessions/{session_id}/model")
    def get_model(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            doc = session.engine.model.to_document()
            doc["params"] = session.engine.params.as_dict()
            doc["commits"] = session.engine.commit_count
        return doc

    @app.post("/sessions/{session_id}/config")
    def post_config(session_id: str, body: ConfigBody) -> dict:
        session = get_session(session_id)
        with session.lock:
            try:
                params = _merge_params(session.engine.params, body)
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            rebuilt = session.engine.set_params(params)
        return {"ok": True, "rebuilt": rebuilt}

    @app.get("/sessions/{session_id}/profile")
    def get_profile(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            return session.engine.history.to_document()

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="demo")

    return app


def _merge_params(current: SpatialParams, body: ConfigBody) -> SpatialParams:
    updates = {k: v for k, v in body.model_dump().items() if v is not None}
    return replace(current, **updates)


def serve(host: str = "127.0.0.1", port: int = 8732, **app_kwargs) -> None:
    """Run the demo service under uvicorn (blocking)."""
    import uvicorn

    uvicorn.run(create_app(**app_kwargs), host=host, port=port, log_level="warning")
