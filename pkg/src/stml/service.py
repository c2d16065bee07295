"""Local HTTP/JSON session service.

Hosts interactive transformation sessions: create one with POST /session,
then under /session/{id} read state/matches/history and mutate with
apply/undo/export.  Single process, many sessions; mutations on one
session are serialized, reads work on immutable snapshots.  Responses
follow the schemas shipped under stml/schemas/.
"""

from __future__ import annotations

import json
import threading
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from .cast import AnnotatedAst, Node
from .engine import Match, Session, trans
from .errors import (
    EmptyHistory,
    StaleMatch,
    StmlError,
    UnsafeApplication,
)
from .parser import parse_c
from .printer import diff, print_c, print_node
from .rules import Rule
from .semantics import ingest_properties

_STATUS = {
    StaleMatch: 409,
    UnsafeApplication: 400,
    EmptyHistory: 400,
}


class _SessionHandle:
    def __init__(self, session_id: str, session: Session,
                 warnings: list[dict]):
        self.id = session_id
        self.session = session
        self.lock = threading.Lock()
        self.warnings = warnings
        self.diffs: dict[tuple[str, str], str] = {}


class ServiceState:
    """Everything the request handler needs, shared across threads."""

    def __init__(self, rules: list[Rule]):
        self.rules = rules
        self.sessions: dict[str, _SessionHandle] = {}
        self.lock = threading.Lock()

    def create(self, code: str, properties: Optional[str]) -> _SessionHandle:
        ast = parse_c(code)
        warnings: list[dict] = []
        session = Session(ast, self.rules)
        if properties:
            ingest_properties(ast, properties, session.store)
            warnings.extend(session.store.warnings)
        handle = _SessionHandle(uuid.uuid4().hex[:12], session, warnings)
        with self.lock:
            self.sessions[handle.id] = handle
        return handle

    def get(self, session_id: str) -> _SessionHandle:
        with self.lock:
            handle = self.sessions.get(session_id)
        if handle is None:
            raise KeyError(session_id)
        return handle


def _binding_json(binding) -> dict:
    out = {}
    for name, value in sorted(binding.items()):
        if isinstance(value, tuple):
            out[name] = [print_node(v) for v in value]
        elif isinstance(value, Node):
            out[name] = print_node(value)
        else:
            out[name] = str(value)
    return out


def _preview(handle: _SessionHandle, match: Match, ast: AnnotatedAst,
             rules: list[Rule]) -> str:
    key = (match.ast_digest, match.match_id)
    hit = handle.diffs.get(key)
    if hit is not None:
        return hit
    try:
        after, _ = trans(ast, match, rules, handle.session.store,
                         override=True)
        text = diff(ast, after)
    except StmlError as err:
        text = f"preview unavailable: {err}"
    handle.diffs[key] = text
    return text


def match_json(handle: _SessionHandle, match: Match, ast: AnnotatedAst,
               rules: list[Rule]) -> dict:
    return {
        "match_id": match.match_id,
        "rule": match.rule,
        "pos": match.pos,
        "certainty": match.certainty,
        "unknown": list(match.unknown),
        "alt": match.alt,
        "binding": _binding_json(match.binding),
        "diff": _preview(handle, match, ast, rules),
    }


def state_json(handle: _SessionHandle) -> dict:
    session = handle.session
    ast = session.ast
    pragmas = [
        {"node": nid, "text": prop.pragma_line()}
        for nid, props in sorted(ast.properties.items())
        for prop in props
    ]
    return {
        "session_id": handle.id,
        "code": print_c(ast),
        "pragmas": pragmas,
        "status": "active" if session.matches() else "final",
        "hash": ast.digest(),
        "warnings": list(handle.warnings),
    }


class _Handler(BaseHTTPRequestHandler):
    state: ServiceState  # assigned by make_server

    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):
        pass

    # -- plumbing ----------------------------------------------------------

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status: int, err: Exception) -> None:
        self._send(status, {
            "error": type(err).__name__, "message": str(err),
        })

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        return json.loads(raw.decode())

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods",
                         "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    # -- routing -----------------------------------------------------------

    def do_GET(self):
        self._route("GET")

    def do_POST(self):
        self._route("POST")

    def _route(self, method: str) -> None:
        parts = [p for p in self.path.split("?")[0].split("/") if p]
        try:
            if parts == [] and method == "GET":
                self._send(200, {"service": "stml", "sessions": len(
                    self.state.sessions)})
                return
            if parts == ["session"] and method == "POST":
                self._create()
                return
            if len(parts) == 3 and parts[0] == "session":
                handle = self.state.get(parts[1])
                self._dispatch(method, parts[2], handle)
                return
            self._send(404, {"error": "NotFound",
                             "message": f"no route {self.path}"})
        except KeyError as err:
            self._error(404, StmlError(f"unknown session {err}"))
        except json.JSONDecodeError as err:
            self._error(400, err)
        except StmlError as err:
            self._error(_STATUS.get(type(err), 400), err)
        except Exception as err:  # keep the server alive
            self._error(500, err)

    def _create(self) -> None:
        body = self._body()
        code = body.get("code")
        if not isinstance(code, str):
            self._send(400, {"error": "BadRequest",
                             "message": "body must carry code: string"})
            return
        handle = self.state.create(code, body.get("properties"))
        self._send(200, {
            "session_id": handle.id,
            "warnings": list(handle.warnings),
        })

    def _dispatch(self, method: str, op: str,
                  handle: _SessionHandle) -> None:
        session = handle.session
        if method == "GET" and op == "state":
            self._send(200, state_json(handle))
        elif method == "GET" and op == "matches":
            ast = session.ast
            payload = {
                "hash": ast.digest(),
                "matches": [
                    match_json(handle, m, ast, self.state.rules)
                    for m in session.matches()
                ],
            }
            self._send(200, payload)
        elif method == "GET" and op == "history":
            self._send(200, {
                "records": [r.to_json() for r in session.records],
            })
        elif method == "POST" and op == "apply":
            self._apply(handle)
        elif method == "POST" and op == "undo":
            with handle.lock:
                session.undo()
            self._send(200, {"state": state_json(handle)})
        elif method == "POST" and op == "export":
            self._send(200, {"code": print_c(session.ast)})
        else:
            self._send(404, {"error": "NotFound",
                             "message": f"no route {method} {op}"})

    def _apply(self, handle: _SessionHandle) -> None:
        body = self._body()
        match_id = body.get("match_id", "")
        override = bool(body.get("override", False))
        session = handle.session
        with handle.lock:
            current = session.ast.digest()
            if not match_id.startswith(current[:12] + ":"):
                raise StaleMatch(
                    f"match {match_id} belongs to another tree version"
                )
            match = None
            for m in session.matches():
                if m.match_id == match_id:
                    match = m
                    break
            if match is None:
                self._send(404, {"error": "UnknownMatch",
                                 "message": f"no match {match_id}"})
                return
            warnings = session.apply(match, override=override)
            handle.warnings.extend(warnings)
            record = session.records[-1]
        self._send(200, {
            "state": state_json(handle),
            "record": record.to_json(),
        })


def make_server(port: int, rules: list[Rule],
                host: str = "127.0.0.1") -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,),
                   {"state": ServiceState(rules)})
    return ThreadingHTTPServer((host, port), handler)


def serve(port: int, rules: list[Rule]) -> None:
    """Run the session service until interrupted."""
    server = make_server(port, rules)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
