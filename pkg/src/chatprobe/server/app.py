"""HTTP API for the chat client.

Every error response is ``{"error": {"code": ..., "message": ...}}`` with a
machine-readable code: schema_violation (400), unknown_session (404),
unknown_dataset (404), unknown_operation (404), range_error (400),
backend_unavailable (503).
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..backends.mock import MockGenerationBackend
from ..backends.protocol import (
    BackendUnavailable,
    GenerationRequest,
    Timeout,
)
from ..data.store import SchemaError, add_custom_input
from ..dialogue.session import Session, SessionSettings, export_session
from ..executor.run import COT_STRATEGIES, EXPERTISE_LEVELS
from ..parsing.engine import Strategy
from ..workbench import Workbench


def _error(status: int, code: str, message: str, **extra: Any) -> JSONResponse:
    body: dict[str, Any] = {"error": {"code": code, "message": message}}
    body["error"].update(extra)
    return JSONResponse(status_code=status, content=body)


class CreateSessionBody(BaseModel):
    seed: int | None = None
    settings: dict[str, Any] | None = None


class TurnBody(BaseModel):
    text: str


class SettingsBody(BaseModel):
    expertise: str | None = None
    cot_strategy: str | None = None
    parsing_strategy: str | None = None
    prompt_overrides: dict[str, str] | None = None


class CustomInputBody(BaseModel):
    fields: dict[str, Any]


class SessionStore:
    """In-memory sessions with optional per-session snapshot files."""

    def __init__(self, workbench: Workbench, snapshot_dir: str | None = None):
        self.workbench = workbench
        self.sessions: dict[str, Session] = {}
        self.lock = threading.Lock()
        self.snapshot_dir = Path(snapshot_dir) if snapshot_dir else None
        if self.snapshot_dir is not None:
            self.snapshot_dir.mkdir(parents=True, exist_ok=True)

    def create(self, seed: int | None, settings: SessionSettings | None) -> Session:
        session = self.workbench.new_session(seed=seed, settings=settings)
        with self.lock:
            self.sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session | None:
        with self.lock:
            session = self.sessions.get(session_id)
        if session is not None:
            return session
        return self._restore(session_id)

    def _restore(self, session_id: str) -> Session | None:
        """Rebuild a session from its snapshot by replaying the recorded turns."""
        if self.snapshot_dir is None:
            return None
        path = self.snapshot_dir / f"{session_id}.json"
        if not path.exists():
            return None
        document = json.loads(path.read_text(encoding="utf-8"))
        session = self.workbench.replay(document, session_id=session_id)
        with self.lock:
            self.sessions[session_id] = session
        return session

    def snapshot(self, session: Session) -> None:
        if self.snapshot_dir is None:
            return
        path = self.snapshot_dir / f"{session.id}.json"
        path.write_text(
            json.dumps(export_session(session), indent=2, ensure_ascii=False),
            encoding="utf-8",
        )


def _parse_settings(payload: dict[str, Any] | None) -> SessionSettings | None:
    if not payload:
        return None
    settings = SessionSettings()
    _update_settings(settings, payload)
    return settings


def _update_settings(settings: SessionSettings, payload: dict[str, Any]) -> None:
    if payload.get("expertise") is not None:
        value = str(payload["expertise"]).lower()
        if value not in EXPERTISE_LEVELS:
            raise ValueError(f"expertise must be one of {sorted(EXPERTISE_LEVELS)}")
        settings.expertise = value
    if payload.get("cot_strategy") is not None:
        value = str(payload["cot_strategy"]).lower()
        if value not in COT_STRATEGIES:
            raise ValueError(f"cot_strategy must be one of {sorted(COT_STRATEGIES)}")
        settings.cot_strategy = value
    if payload.get("parsing_strategy") is not None:
        value = str(payload["parsing_strategy"]).lower()
        try:
            Strategy(value)
        except ValueError:
            raise ValueError(f"parsing_strategy must be one of {[s.value for s in Strategy]}") from None
        settings.parsing_strategy = value
    if payload.get("prompt_overrides") is not None:
        overrides = payload["prompt_overrides"]
        if not isinstance(overrides, dict):
            raise ValueError("prompt_overrides must be an object of template texts")
        settings.prompt_overrides = {str(k): str(v) for k, v in overrides.items()}


def _turn_payload(session: Session, turn) -> dict[str, Any]:
    return {
        "turn_index": turn.index,
        "response_text": turn.response_text,
        "parse": turn.parse_text,
        "clarification": turn.clarification is not None,
        "suggestion": (
            {"op": turn.suggestion.op, "question": turn.suggestion.question}
            if turn.suggestion is not None
            else None
        ),
        "payloads": turn.execution.payloads if turn.execution is not None else [],
        "repairs": [r.value for r in turn.parse_result.repairs] if turn.parse_result else [],
        "strategy": turn.parse_result.strategy.value if turn.parse_result else None,
        "provenance": (
            [
                {"kind": call.kind, "prompt": call.prompt, "response": call.response}
                for call in turn.execution.provenance
            ]
            if turn.execution is not None
            else []
        ),
    }


def create_app(
    workbench: Workbench,
    snapshot_dir: str | None = None,
    frontend_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="chatprobe", docs_url=None, redoc_url=None)
    store = SessionStore(workbench, snapshot_dir)
    app.state.store = store
    app.state.workbench = workbench

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return _error(400, "schema_violation", str(exc.errors()[:3]))

    @app.post("/api/sessions", status_code=201)
    def create_session(body: CreateSessionBody | None = None):
        body = body or CreateSessionBody()
        try:
            settings = _parse_settings(body.settings)
        except ValueError as exc:
            return _error(400, "schema_violation", str(exc))
        session = store.create(body.seed, settings)
        store.snapshot(session)
        return {"session_id": session.id, "settings": session.settings.to_dict()}

    @app.post("/api/sessions/{session_id}/turns")
    def post_turn(session_id: str, body: TurnBody):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id}")
        try:
            turn = workbench.handle_turn(session, body.text)
        except (BackendUnavailable, Timeout) as exc:
            return _error(
                503, "backend_unavailable", str(exc),
                degradation="generation backend unreachable; turn was not recorded",
            )
        store.snapshot(session)
        return _turn_payload(session, turn)

    @app.get("/api/sessions/{session_id}/export")
    def get_export(session_id: str):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id}")
        return export_session(session)

    @app.put("/api/sessions/{session_id}/settings")
    def put_settings(session_id: str, body: SettingsBody):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id}")
        try:
            _update_settings(session.settings, body.model_dump())
        except ValueError as exc:
            return _error(400, "schema_violation", str(exc))
        store.snapshot(session)
        return {"settings": session.settings.to_dict()}

    @app.get("/api/datasets/{name}/instances")
    def list_instances(name: str, offset: int = 0, limit: int = 50):
        ds = workbench.dataset
        if name != ds.name:
            return _error(404, "unknown_dataset", f"active dataset is {ds.name!r}")
        if offset < 0 or limit < 1:
            return _error(400, "schema_violation", "offset must be >= 0 and limit >= 1")
        items = ds.instances[offset : offset + limit]
        return {
            "name": ds.name,
            "task": ds.task.value,
            "total": len(ds.instances),
            "label_names": ds.label_names,
            "offset": offset,
            "instances": [
                {
                    "id": i.id,
                    "fields": i.fields,
                    "label": ds.label_name(i.gold_label) if i.gold_label is not None else None,
                    "source": i.source.value,
                }
                for i in items
            ],
        }

    @app.post("/api/custom-inputs", status_code=201)
    def post_custom_input(body: CustomInputBody):
        try:
            instance = add_custom_input(workbench.dataset, body.fields)
        except SchemaError as exc:
            return _error(400, "schema_violation", str(exc))
        return {
            "instance": {
                "id": instance.id,
                "fields": instance.fields,
                "source": instance.source.value,
            },
            "history_length": len(workbench.dataset.custom_input_history),
        }

    @app.get("/api/custom-inputs")
    def list_custom_inputs():
        return {"history": workbench.dataset.custom_input_history}

    @app.get("/api/operations")
    def list_operations():
        return json.loads(workbench.catalog.to_json())

    @app.get("/api/search")
    def search(q: str, limit: int = 3):
        provider = workbench.search_provider
        results = provider.search(q, limit)
        return {
            "enabled": provider.enabled,
            "results": [
                {"title": r.title, "url": r.url, "snippet": r.snippet} for r in results
            ],
        }

    @app.get("/api/health")
    def health():
        suite = workbench.backends
        generation: dict[str, Any] = {
            "configured": True,
            "supports_grammar": bool(getattr(suite.generation, "supports_grammar", False)),
        }
        if isinstance(suite.generation, MockGenerationBackend):
            generation["reachable"] = True
        else:
            try:
                suite.generation.generate(GenerationRequest(prompt="ping", max_new_tokens=1))
                generation["reachable"] = True
            except Exception:
                generation["reachable"] = False
        embedding = {"configured": suite.embedding is not None}
        attribution = {"configured": suite.attribution is not None}
        ok = generation["reachable"]
        return {
            "status": "ok" if ok else "degraded",
            "backends": {
                "generation": generation,
                "embedding": embedding,
                "attribution": attribution,
            },
        }

    if frontend_dir and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="ui")

    return app
