"""JSON-over-HTTP facade exposing sessions to the workbench and other clients.

Only noisy estimates cross this boundary: responses carry bin and cell
estimates with their errors, never true counts, raw records, or noise
seeds. Mutations on one session are serialized by the session's own lock;
interleaved remeasure requests can never overspend the budget. Errors are
structured ``{code, message}`` bodies.
"""

from __future__ import annotations

import threading
import uuid

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .errors import (
    BudgetExhaustedError,
    ConfigError,
    EngineError,
    UnknownAttributeError,
    UnknownDatasetError,
    UnknownQueryError,
    UnknownSessionError,
)
from .registry import DatasetRegistry
from .session import Session, SessionConfig

_STATUS_BY_CODE = {
    UnknownDatasetError.code: 404,
    UnknownSessionError.code: 404,
    UnknownQueryError.code: 404,
    BudgetExhaustedError.code: 409,
    UnknownAttributeError.code: 400,
    ConfigError.code: 400,
}


class SessionCreateRequest(BaseModel):
    datasetId: str
    config: dict = Field(default_factory=dict)


class QueryCreateRequest(BaseModel):
    attributes: list[str]
    filter: dict[str, list[str]] | None = None


class SessionStore:
    """In-memory session table; per-session mutation order comes from the
    sessions' own locks, this lock only guards the table."""

    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, session: Session) -> str:
        session_id = uuid.uuid4().hex
        with self._lock:
            self._sessions[session_id] = session
        return session_id

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSessionError(f"unknown session {session_id!r}")
        return session


def _query_view(session: Session, query_id: str) -> dict:
    view = session.view()
    for entry in view["queries"]:
        if entry["queryId"] == query_id:
            return entry
    raise UnknownQueryError(f"unknown query {query_id!r}")


def create_app(registry: DatasetRegistry, default_config: SessionConfig | None = None) -> FastAPI:
    app = FastAPI(title="remeasure", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.registry = registry
    app.state.default_config = default_config or SessionConfig()
    app.state.store = SessionStore()

    @app.exception_handler(EngineError)
    async def engine_error_handler(request: Request, exc: EngineError):
        status = _STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(status_code=status, content={"code": exc.code, "message": str(exc)})

    @app.post("/sessions", status_code=201)
    def create_session(body: SessionCreateRequest):
        dataset = app.state.registry.get(body.datasetId)
        merged = dict(app.state.default_config.to_dict())
        merged.update(body.config or {})
        session = Session(dataset, SessionConfig.from_dict(merged))
        session_id = app.state.store.create(session)
        return {"sessionId": session_id, "budget": session.budget_status()}

    @app.post("/sessions/{session_id}/queries", status_code=201)
    def add_query(session_id: str, body: QueryCreateRequest):
        session = app.state.store.get(session_id)
        query_id, _ = session.add_query(body.attributes, body.filter)
        return {
            "sessionId": session_id,
            "query": _query_view(session, query_id),
            "budget": session.budget_status(),
        }

    @app.post("/sessions/{session_id}/queries/{query_id}/remeasure")
    def remeasure(session_id: str, query_id: str):
        session = app.state.store.get(session_id)
        session.remeasure(query_id)
        return {
            "sessionId": session_id,
            "query": _query_view(session, query_id),
            "budget": session.budget_status(),
        }

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = app.state.store.get(session_id)
        view = session.view()
        view["sessionId"] = session_id
        return view

    @app.get("/sessions/{session_id}/budget")
    def get_budget(session_id: str):
        session = app.state.store.get(session_id)
        return session.budget_status()

    return app
