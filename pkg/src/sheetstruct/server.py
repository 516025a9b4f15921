"""HTTP service exposing sessions to the web UI.

JSON endpoints (field names are the UI contract):

* ``POST /sessions`` ``{facts|csv, sheet?}`` -> 201 ``{id, mm, grid}``
* ``GET /sessions/{id}`` -> ``{mm, attributes}``
* ``GET /sessions/{id}/grid`` -> ``{cells: [{sheet,col,row,a1,kind,display}]}``
* ``POST /sessions/{id}/grammars`` ``{name, text}`` -> ``{diagnostics}``
  (the grammar is stored only when there are no diagnostics)
* ``POST /sessions/{id}/match`` ``{grammar, rule}`` -> ``{matches}``
* ``POST /sessions/{id}/commands`` ``{type, ...}`` -> ``{mm, ...}`` where
  type is one of accept, group, rename, name_from_label, ungroup,
  generalize, undo
* ``POST /sessions/{id}/undo`` — shorthand for the undo command
* ``GET /sessions/{id}/export?format=mm|facts|json`` -> ``{format, content}``
* ``GET /healthz`` -> ``{ok: true}``

Statuses: 400 malformed payload, 404 unknown session, 409 command
precondition failure (model unchanged), 422 grammar/formula/facts parse
error.  Mutations on one session are serialized by a per-session lock;
sessions are independent.  With ``static_dir`` the app also serves the
UI's static assets at ``/``.  Sessions live until ``idle_timeout``
seconds pass without a touch (default: forever).
"""

from __future__ import annotations

import threading
import time

from fastapi import Body, FastAPI, HTTPException
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from starlette.exceptions import HTTPException as StarletteHTTPException

from .arrows import Group, NameFromLabel, Rename, Ungroup, model_summary
from .cells import parse_address
from .session import (
    AcceptSuggestions,
    ApplyTransform,
    Export,
    Generalize,
    LoadGrammar,
    MatchRule,
    Session,
    SessionError,
    Undo,
    create_session,
    execute,
    grid_cells,
)

__all__ = ["create_app", "serve"]

_STATUS = {"malformed": 400, "precondition": 409, "parse": 422}


class _Store:
    """Sessions by id; one lock per session serializes its mutations.

    With an idle timeout, sessions untouched for that many seconds are
    dropped on the next access to any session (no background thread).
    """

    def __init__(self, idle_timeout: float | None = None) -> None:
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._touched: dict[str, float] = {}
        self._create_lock = threading.Lock()
        self._idle_timeout = idle_timeout

    def add(self, s: Session) -> None:
        with self._create_lock:
            self._sessions[s.id] = s
            self._locks[s.id] = threading.Lock()
            self._touched[s.id] = time.monotonic()

    def _refresh(self, sid: str) -> None:
        if self._idle_timeout is None:
            return
        now = time.monotonic()
        with self._create_lock:
            for stale in [
                k for k, t in self._touched.items() if now - t > self._idle_timeout
            ]:
                self._sessions.pop(stale, None)
                self._locks.pop(stale, None)
                self._touched.pop(stale, None)
            if sid in self._touched:
                self._touched[sid] = now

    def get(self, sid: str) -> Session:
        self._refresh(sid)
        s = self._sessions.get(sid)
        if s is None:
            raise HTTPException(404, f"unknown session {sid!r}")
        return s

    def run(self, sid: str, command) -> dict:
        self._refresh(sid)
        lock = self._locks.get(sid)
        if lock is None:
            raise HTTPException(404, f"unknown session {sid!r}")
        with lock:
            s2, payload = execute(self.get(sid), command)
            self._sessions[sid] = s2
        return payload


def _field(payload: dict, name: str, typ: type, required: bool = True):
    value = payload.get(name)
    if value is None:
        if required:
            raise HTTPException(400, f"missing field {name!r}")
        return None
    if not isinstance(value, typ):
        raise HTTPException(400, f"field {name!r} must be {typ.__name__}")
    return value


def _parse_command(payload: dict, s: Session):
    ctype = _field(payload, "type", str)
    if ctype == "accept":
        indices = _field(payload, "indices", list)
        if not all(isinstance(i, int) for i in indices):
            raise HTTPException(400, "field 'indices' must be a list of integers")
        return AcceptSuggestions(tuple(indices))
    if ctype == "undo":
        return Undo()
    if ctype == "rename":
        return ApplyTransform(
            Rename(_field(payload, "old", str), _field(payload, "new", str))
        )
    if ctype == "ungroup":
        return ApplyTransform(Ungroup(_field(payload, "name", str)))
    if ctype == "name_from_label":
        return ApplyTransform(NameFromLabel(_field(payload, "name", str)))
    if ctype == "generalize":
        return Generalize(_field(payload, "attr", str))
    if ctype == "group":
        texts = _field(payload, "cells", list)
        if not texts or not all(isinstance(t, str) for t in texts):
            raise HTTPException(400, "field 'cells' must be a list of addresses")
        default_sheet = s.wb.sheets[0] if s.wb.sheets else "Sheet1"
        try:
            cells = tuple(parse_address(t, default_sheet) for t in texts)
        except ValueError as e:
            raise HTTPException(400, str(e)) from e
        labels = payload.get("index_labels")
        if labels is not None and (
            not isinstance(labels, list) or not all(isinstance(x, str) for x in labels)
        ):
            raise HTTPException(400, "field 'index_labels' must be a list of strings")
        return ApplyTransform(
            Group(cells, _field(payload, "name", str),
                  tuple(labels) if labels is not None else None)
        )
    raise HTTPException(400, f"unknown command type {ctype!r}")


def create_app(
    static_dir: str | None = None, idle_timeout: float | None = None
) -> FastAPI:
    app = FastAPI(title="sheetstruct", docs_url=None, redoc_url=None)
    store = _Store(idle_timeout)

    @app.exception_handler(SessionError)
    async def _session_error(_request, exc: SessionError):
        return JSONResponse(
            status_code=_STATUS.get(exc.kind, 409), content={"error": str(exc)}
        )

    @app.exception_handler(RequestValidationError)
    async def _malformed(_request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "malformed payload"})

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(_request, exc: StarletteHTTPException):
        # every error body uses the same "error" field
        return JSONResponse(
            status_code=exc.status_code, content={"error": str(exc.detail)}
        )

    @app.get("/healthz")
    def healthz():
        return {"ok": True}

    @app.post("/sessions", status_code=201)
    def new_session(payload: dict = Body(...)):
        facts = _field(payload, "facts", str, required=False)
        csv_text = _field(payload, "csv", str, required=False)
        sheet = _field(payload, "sheet", str, required=False)
        s = create_session(facts=facts, csv_text=csv_text, sheet=sheet)
        store.add(s)
        return {"id": s.id, "mm": s.mm, "grid": grid_cells(s)}

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        s = store.get(sid)
        return {
            "mm": s.mm,
            "attributes": model_summary(s.model)["attributes"],
            "history_depth": len(s.history),
            "grammars": sorted(s.grammars),
            "pending_matches": len(s.pending_matches),
        }

    @app.get("/sessions/{sid}/grid")
    def get_grid(sid: str):
        return {"cells": grid_cells(store.get(sid))}

    @app.post("/sessions/{sid}/grammars")
    def post_grammar(sid: str, payload: dict = Body(...)):
        command = LoadGrammar(
            _field(payload, "name", str), _field(payload, "text", str)
        )
        return store.run(sid, command)

    @app.post("/sessions/{sid}/match")
    def post_match(sid: str, payload: dict = Body(...)):
        command = MatchRule(
            _field(payload, "grammar", str), _field(payload, "rule", str)
        )
        return store.run(sid, command)

    @app.post("/sessions/{sid}/commands")
    def post_command(sid: str, payload: dict = Body(...)):
        command = _parse_command(payload, store.get(sid))
        return store.run(sid, command)

    @app.post("/sessions/{sid}/undo")
    def post_undo(sid: str):
        return store.run(sid, Undo())

    @app.get("/sessions/{sid}/export")
    def get_export(sid: str, format: str = "mm"):
        _, payload = execute(store.get(sid), Export(format))
        return payload

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="static")

    return app


def serve(
    port: int,
    static_dir: str | None = None,
    host: str = "127.0.0.1",
    idle_timeout: float | None = None,
) -> None:
    """Run the service until interrupted."""
    import uvicorn

    uvicorn.run(
        create_app(static_dir, idle_timeout),
        host=host,
        port=port,
        log_level="warning",
    )
