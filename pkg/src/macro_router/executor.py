"""Turn call templates into a concrete plan and run it over a transport.

Calls run strictly in order. Each 2xx response may bind values (extracted by
dot-path from the structured body) that later calls substitute into their own
URL, headers or body; the first failure halts the plan so no call ever runs
with unmet prerequisites.
"""

from __future__ import annotations

import json
import re
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from typing import Protocol

from .errors import UnboundPlaceholderError
from .registry import ApiCallTemplate, OutputBinding, iter_placeholders

_PLACEHOLDER_RE = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")


@dataclass
class ConcreteCall:
    method: str
    url: str  # may keep {placeholders} for bindings produced by earlier calls
    headers: dict[str, str] = field(default_factory=dict)
    body: object = None
    output_bindings: list[OutputBinding] = field(default_factory=list)


@dataclass
class ApiCallPlan:
    calls: list[ConcreteCall] = field(default_factory=list)


@dataclass
class CallResult:
    status_code: int | None = None
    extracted: dict[str, object] = field(default_factory=dict)
    error: str | None = None


@dataclass
class ExecutionResult:
    per_call: list[CallResult] = field(default_factory=list)
    succeeded: bool = True
    halted_at: int | None = None


class Transport(Protocol):
    def send(self, call: ConcreteCall) -> tuple[int, object]: ...


def _format_value(value) -> str:
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def _substitute_text(text: str, bindings: dict, encode: bool) -> str:
    def repl(match):
        name = match.group(1)
        if name not in bindings:
            return match.group(0)
        rendered = _format_value(bindings[name])
        if encode:
            rendered = urllib.parse.quote(rendered, safe="")
        return rendered

    return _PLACEHOLDER_RE.sub(repl, text)


def _substitute_body(node, bindings: dict):
    if isinstance(node, str):
        match = _PLACEHOLDER_RE.fullmatch(node)
        if match and match.group(1) in bindings:
            return bindings[match.group(1)]  # keep the bound value's type
        return _substitute_text(node, bindings, encode=False)
    if isinstance(node, dict):
        return {k: _substitute_body(v, bindings) for k, v in node.items()}
    if isinstance(node, list):
        return [_substitute_body(item, bindings) for item in node]
    return node


def instantiate(
    templates: list[ApiCallTemplate], bindings: dict[str, object]
) -> ApiCallPlan:
    """Substitute bound values into the templates, percent-encoding URL parts.

    Placeholders naming an output binding of an earlier call stay symbolic
    until run time; anything else unresolved raises UnboundPlaceholderError,
    as does an output binding that would shadow an existing name.
    """
    available = set(bindings)
    calls = []
    for idx, template in enumerate(templates):
        for name in iter_placeholders(template):
            if name not in available:
                raise UnboundPlaceholderError(name, idx)
        calls.append(
            ConcreteCall(
                method=template.method,
                url=_substitute_text(template.url_template, bindings, encode=True),
                headers={
                    _substitute_text(k, bindings, encode=False): _substitute_text(
                        v, bindings, encode=False
                    )
                    for k, v in template.header_templates.items()
                },
                body=_substitute_body(template.body_template, bindings),
                output_bindings=list(template.output_bindings),
            )
        )
        for ob in template.output_bindings:
            if ob.bind_name in available:
                raise UnboundPlaceholderError(ob.bind_name, idx)
            available.add(ob.bind_name)
    return ApiCallPlan(calls=calls)


def extract_path(body, path: str):
    """Follow a dot-separated path through dicts (and list indices)."""
    node = body
    for part in path.split("."):
        if isinstance(node, dict) and part in node:
            node = node[part]
        elif isinstance(node, list) and part.isdigit() and int(part) < len(node):
            node = node[int(part)]
        else:
            raise LookupError(path)
    return node


def execute(plan: ApiCallPlan, transport: Transport) -> ExecutionResult:
    """Run the plan in order, threading output bindings into later calls."""
    result = ExecutionResult()
    context: dict[str, object] = {}
    for idx, call in enumerate(plan.calls):
        resolved = ConcreteCall(
            method=call.method,
            url=_substitute_text(call.url, context, encode=True),
            headers={
                k: _substitute_text(v, context, encode=False)
                for k, v in call.headers.items()
            },
            body=_substitute_body(call.body, context),
            output_bindings=call.output_bindings,
        )
        call_result = CallResult()
        result.per_call.append(call_result)
        try:
            status, body = transport.send(resolved)
        except Exception as exc:
            call_result.error = f"transport: {exc}"
            result.succeeded = False
            result.halted_at = idx
            return result
        call_result.status_code = status
        if not 200 <= status < 300:
            call_result.error = f"status {status}"
            result.succeeded = False
            result.halted_at = idx
            return result
        for ob in call.output_bindings:
            try:
                value = extract_path(body, ob.path)
            except LookupError:
                call_result.error = f"missing path {ob.path!r} in response"
                result.succeeded = False
                result.halted_at = idx
                return result
            call_result.extracted[ob.bind_name] = value
            context[ob.bind_name] = value
    return result


class SimulatedTransport:
    """Canned responder keyed by (method, URL path); logs every request.

    Fixture format: a JSON list of {"method", "path", "status", "body"}.
    Unknown (method, path) pairs answer 404.
    """

    def __init__(self, responders: dict[tuple[str, str], tuple[int, object]] | None = None):
        self.responders = responders or {}
        self.request_log: list[ConcreteCall] = []

    @classmethod
    def from_fixture(cls, entries: list[dict]) -> "SimulatedTransport":
        responders = {}
        for entry in entries:
            key = (entry["method"].upper(), entry["path"])
            responders[key] = (int(entry["status"]), entry.get("body"))
        return cls(responders)

    @classmethod
    def from_fixture_file(cls, path) -> "SimulatedTransport":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_fixture(json.load(fh))

    def add(self, method: str, path: str, status: int, body=None):
        self.responders[(method.upper(), path)] = (status, body)

    def send(self, call: ConcreteCall) -> tuple[int, object]:
        self.request_log.append(call)
        path = urllib.parse.urlsplit(call.url).path
        responder = self.responders.get((call.method.upper(), path))
        if responder is None:
            return 404, {"error": f"no responder for {call.method} {path}"}
        return responder


class HttpTransport:
    """Live HTTP/1.1 transport with JSON bodies and a per-call timeout."""

    def __init__(self, timeout: float = 10.0):
        self.timeout = timeout

    def send(self, call: ConcreteCall) -> tuple[int, object]:
        data = None
        headers = dict(call.headers)
        if call.body is not None:
            data = json.dumps(call.body).encode("utf-8")
            headers.setdefault("Content-Type", "application/json")
        request = urllib.request.Request(
            call.url, data=data, headers=headers, method=call.method
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                status = response.status
                raw = response.read()
        except urllib.error.HTTPError as exc:
            status = exc.code
            raw = exc.read()
        try:
            body = json.loads(raw.decode("utf-8")) if raw else None
        except (ValueError, UnicodeDecodeError):
            body = None  # non-structured body; path extraction will fail
        return status, body
