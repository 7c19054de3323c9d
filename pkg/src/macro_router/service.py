"""JSON-over-HTTP front for the router, plus static hosting for the console.

Endpoints (all bodies JSON, snake_case keys):

    GET    /macros                  list records
    POST   /macros                  add a record            -> 201 {"id"}
    DELETE /macros/{id}             remove a record
    POST   /route                   {"utterance"}           -> RouteDecision
    POST   /execute                 {"utterance","dry_run"} -> decision/plan/result
    POST   /feedback                {"macro_id","outcome"}  -> updated stats
    POST   /train/propose           {"description","k"}     -> session + proposals
    POST   /train/commit            draft [+ "session_id"]  -> 201 {"id"}
    GET    /stats                   per-macro stats + config echo
    GET    /ui, /ui/<asset>         static console assets (when configured)

Errors are {"error": {"code", "message", "detail"}} with the matching HTTP
status (bad_request 400, not_found 404, conflict 409, internal 500). Reads
run concurrently; anything touching the registry writer serializes.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import asdict
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .errors import (
    DuplicateNameError,
    EmptyDescriptionError,
    IllegalTransitionError,
    InvalidTemplateError,
    MacroRouterError,
    SchemaError,
    UnknownIdError,
)
from .executor import HttpTransport, Transport
from .pipeline import (
    DRAFTING,
    PROPOSED,
    Router,
    TrainingSession,
    blended_score,
    execute_with_feedback,
)
from .registry import parse_record

_STATUS = {"bad_request": 400, "not_found": 404, "conflict": 409, "internal": 500}


class ApiError(MacroRouterError):
    def __init__(self, code: str, message: str, detail: str = ""):
        super().__init__(message)
        self.code = code
        self.detail = detail

    @property
    def status(self) -> int:
        return _STATUS[self.code]

    def body(self) -> dict:
        return {"error": {"code": self.code, "message": str(self), "detail": self.detail}}


def _to_api_error(exc: Exception) -> ApiError:
    if isinstance(exc, ApiError):
        return exc
    if isinstance(exc, DuplicateNameError):
        return ApiError("conflict", str(exc))
    if isinstance(exc, IllegalTransitionError):
        return ApiError("conflict", str(exc))
    if isinstance(exc, UnknownIdError):
        return ApiError("not_found", str(exc))
    if isinstance(exc, SchemaError):
        return ApiError("bad_request", str(exc), exc.path)
    if isinstance(exc, (InvalidTemplateError, EmptyDescriptionError, ValueError)):
        return ApiError("bad_request", str(exc))
    return ApiError("internal", f"{type(exc).__name__}: {exc}")


class ApiService:
    """Endpoint implementations over one shared Router (also used in-process)."""

    def __init__(self, router: Router, transport: Transport | None = None):
        self.router = router
        self.transport = transport or HttpTransport()
        self.sessions: dict[int, TrainingSession] = {}
        self._session_seq = 0
        self._write_lock = threading.RLock()

    def _persist(self):
        # the registry file is the single source of record shared with the CLI
        if self.router.config.registry_path:
            self.router.registry.save(self.router.config.registry_path)

    # each handler returns (http status, json-able body)

    def list_macros(self):
        return 200, {"macros": [asdict(r) for r in self.router.registry.list_records()]}

    def add_macro(self, payload: dict):
        record = parse_record(payload, "body", require_id=False)
        with self._write_lock:
            macro_id = self.router.registry.add_macro(record)
            self._persist()
        return 201, {"id": macro_id}

    def remove_macro(self, macro_id: int):
        with self._write_lock:
            removed = self.router.registry.remove_macro(macro_id)
            self._persist()
        return 200, {"removed": macro_id, "macro_name": removed.macro_name}

    def route(self, payload: dict):
        utterance = _require_str(payload, "utterance")
        return 200, self.router.route(utterance).to_dict()

    def execute(self, payload: dict):
        utterance = _require_str(payload, "utterance")
        dry_run = bool(payload.get("dry_run", False))
        decision = self.router.route(utterance)
        body = {"decision": decision.to_dict(), "plan": None, "result": None}
        if decision.kind != "matched" or decision.missing_params:
            return 200, body
        plan = self.router.plan_for(decision)
        body["plan"] = [asdict(call) for call in plan.calls]
        if dry_run:
            return 200, body
        with self._write_lock:
            result = execute_with_feedback(
                self.router, decision.macro_id, plan, self.transport
            )
            self._persist()
        body["result"] = asdict(result)
        return 200, body

    def feedback(self, payload: dict):
        macro_id = _require_int(payload, "macro_id")
        outcome = _require_str(payload, "outcome")
        with self._write_lock:
            stats = self.router.record_feedback(macro_id, outcome, source="user")
            self._persist()
        return 200, {"macro_id": macro_id, "stats": asdict(stats)}

    def train_propose(self, payload: dict):
        description = _require_str(payload, "description")
        k = int(payload.get("k", 3))
        session = self.router.training_propose(description, k)
        with self._write_lock:
            self._session_seq += 1
            session_id = self._session_seq
            self.sessions[session_id] = session
        proposals = [
            {
                "id": p.id,
                "macro_name": self.router.registry.get(p.id).macro_name,
                "score": p.score,
                "rank": p.rank,
            }
            for p in session.proposals
        ]
        return 200, {"session_id": session_id, "state": session.state, "proposals": proposals}

    def train_commit(self, payload: dict):
        session_id = payload.get("session_id")
        draft_fields = {k: v for k, v in payload.items() if k != "session_id"}
        draft = parse_record(draft_fields, "draft", require_id=False)
        with self._write_lock:
            if session_id is not None:
                session = self.sessions.get(session_id)
                if session is None:
                    raise ApiError("not_found", f"no training session {session_id}")
                if session.state == PROPOSED:
                    session.start_draft(draft)
                elif session.state == DRAFTING:
                    session.draft = draft
                else:
                    raise IllegalTransitionError(session.state, "commit")
                macro_id = self.router.training_commit(session)
            else:
                macro_id = self.router.registry.add_macro(draft)
            self._persist()
        return 201, {"id": macro_id, "session_id": session_id}

    def stats(self):
        macros = []
        for record in self.router.registry.list_records():
            stats = record.stats
            macros.append(
                {
                    "id": record.id,
                    "macro_name": record.macro_name,
                    "successes": stats.successes,
                    "attempts": stats.attempts,
                    "smoothed_rate": blended_score(0.0, stats, 0.0),
                }
            )
        return 200, {"macros": macros, "config": self.router.config.to_dict()}


def _require_str(payload: dict, key: str) -> str:
    value = payload.get(key)
    if not isinstance(value, str):
        raise ApiError("bad_request", f"field {key!r} must be a string", key)
    return value


def _require_int(payload: dict, key: str) -> int:
    value = payload.get(key)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ApiError("bad_request", f"field {key!r} must be an integer", key)
    return value


_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".json": "application/json",
    ".svg": "image/svg+xml",
}


def build_server(service: ApiService, host: str = "127.0.0.1", port: int = 8080):
    """Create (not start) a threading HTTP server bound to the service."""

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _reply(self, status: int, body: dict):
            raw = json.dumps(body, sort_keys=True).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(raw)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(raw)

        def _read_json(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            if not raw:
                return {}
            try:
                parsed = json.loads(raw.decode("utf-8"))
            except (ValueError, UnicodeDecodeError):
                raise ApiError("bad_request", "request body is not valid JSON")
            if not isinstance(parsed, dict):
                raise ApiError("bad_request", "request body must be a JSON object")
            return parsed

        def _dispatch(self, method: str):
            path = self.path.split("?", 1)[0].rstrip("/") or "/"
            try:
                if method == "GET" and path == "/macros":
                    return self._reply(*service.list_macros())
                if method == "POST" and path == "/macros":
                    return self._reply(*service.add_macro(self._read_json()))
                if method == "DELETE" and path.startswith("/macros/"):
                    raw_id = path[len("/macros/"):]
                    if not raw_id.lstrip("-").isdigit():
                        raise ApiError("bad_request", f"bad macro id {raw_id!r}")
                    return self._reply(*service.remove_macro(int(raw_id)))
                if method == "POST" and path == "/route":
                    return self._reply(*service.route(self._read_json()))
                if method == "POST" and path == "/execute":
                    return self._reply(*service.execute(self._read_json()))
                if method == "POST" and path == "/feedback":
                    return self._reply(*service.feedback(self._read_json()))
                if method == "POST" and path == "/train/propose":
                    return self._reply(*service.train_propose(self._read_json()))
                if method == "POST" and path == "/train/commit":
                    return self._reply(*service.train_commit(self._read_json()))
                if method == "GET" and path == "/stats":
                    return self._reply(*service.stats())
                if method == "GET" and (path == "/ui" or path.startswith("/ui/")):
                    return self._serve_static(path)
                raise ApiError("not_found", f"no route {method} {path}")
            except Exception as exc:  # every failure maps to the error shape
                error = _to_api_error(exc)
                self._reply(error.status, error.body())

        def _serve_static(self, path: str):
            ui_dir = service.router.config.ui_dir
            if not ui_dir or not os.path.isdir(ui_dir):
                raise ApiError("not_found", "console assets are not configured (ui_dir)")
            rel = path[len("/ui"):].lstrip("/") or "index.html"
            full = os.path.realpath(os.path.join(ui_dir, rel))
            if not full.startswith(os.path.realpath(ui_dir) + os.sep):
                raise ApiError("bad_request", "bad asset path")
            if not os.path.isfile(full):
                raise ApiError("not_found", f"no asset {rel}")
            with open(full, "rb") as fh:
                raw = fh.read()
            ext = os.path.splitext(full)[1].lower()
            self.send_response(200)
            self.send_header("Content-Type", _CONTENT_TYPES.get(ext, "application/octet-stream"))
            self.send_header("Content-Length", str(len(raw)))
            self.end_headers()
            self.wfile.write(raw)

        def do_GET(self):
            self._dispatch("GET")

        def do_POST(self):
            self._dispatch("POST")

        def do_DELETE(self):
            self._dispatch("DELETE")

    return ThreadingHTTPServer((host, port), Handler)


def serve(service: ApiService, host: str = "127.0.0.1", port: int | None = None):
    """Blocking entry point used by the CLI `serve` subcommand."""
    server = build_server(service, host, port if port is not None else service.router.config.port)
    bound = server.server_address
    print(f"macro-router service on http://{bound[0]}:{bound[1]}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
