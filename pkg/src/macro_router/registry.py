"""The custom macro database: records, CRUD, matching corpus, feedback stats.

Persisted as a single UTF-8 JSON document so the whole database travels as
one local file. Any mutation that changes the matching corpus bumps the
revision counter, which tells callers to refit their vocabulary.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field, asdict
from datetime import datetime, timezone

from .errors import (
    DuplicateNameError,
    InvalidTemplateError,
    SchemaError,
    UnknownIdError,
)
from .slots import ParamSpec, SlotSpec

SCHEMA_VERSION = 1
METHODS = ("GET", "POST", "PUT", "DELETE")
PARAM_KINDS = ("text", "number")

_PLACEHOLDER_RE = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")


@dataclass
class OutputBinding:
    bind_name: str
    path: str  # dot-separated path into the structured response body


@dataclass
class ApiCallTemplate:
    method: str
    url_template: str
    header_templates: dict[str, str] = field(default_factory=dict)
    body_template: object = None
    output_bindings: list[OutputBinding] = field(default_factory=list)


@dataclass
class FeedbackStats:
    successes: int = 0
    attempts: int = 0


@dataclass
class MacroRecord:
    id: int | None
    use_case: str
    scenario_description: str
    macro_name: str
    params: list[ParamSpec] = field(default_factory=list)
    call_templates: list[ApiCallTemplate] = field(default_factory=list)
    slot_specs: list[SlotSpec] = field(default_factory=list)
    stats: FeedbackStats = field(default_factory=FeedbackStats)
    created_at: str = ""

    def corpus_text(self) -> str:
        return " ".join(
            [self.use_case, self.scenario_description, self.macro_name.replace("_", " ")]
        )


def iter_placeholders(template: ApiCallTemplate):
    """Yield every {name} placeholder appearing anywhere in the template."""
    yield from _PLACEHOLDER_RE.findall(template.url_template)
    for key, value in template.header_templates.items():
        yield from _PLACEHOLDER_RE.findall(key)
        yield from _PLACEHOLDER_RE.findall(value)
    yield from _body_placeholders(template.body_template)


def _body_placeholders(node):
    if isinstance(node, str):
        yield from _PLACEHOLDER_RE.findall(node)
    elif isinstance(node, dict):
        for k, v in node.items():
            yield from _body_placeholders(k)
            yield from _body_placeholders(v)
    elif isinstance(node, list):
        for item in node:
            yield from _body_placeholders(item)


def validate_record(record: MacroRecord) -> None:
    """Enforce the per-record invariants (raises ValueError / InvalidTemplateError)."""
    if not record.macro_name:
        raise ValueError("macro_name must be non-empty")
    names = [p.name for p in record.params]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate param names in {record.macro_name}")
    for p in record.params:
        if not p.name:
            raise ValueError("param name must be non-empty")
        if p.kind not in PARAM_KINDS:
            raise ValueError(f"param kind must be one of {PARAM_KINDS}: {p.kind!r}")
    bound = set(names)
    for idx, call in enumerate(record.call_templates):
        if call.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}: {call.method!r}")
        for name in iter_placeholders(call):
            if name not in bound:
                raise InvalidTemplateError(name, f"{record.macro_name} call {idx}")
        for ob in call.output_bindings:
            if ob.bind_name in names:
                raise ValueError(
                    f"output binding {ob.bind_name!r} collides with a param name"
                )
            bound.add(ob.bind_name)
    for spec in record.slot_specs:
        spec.anchors()  # raises ValueError when the capture marker is missing


class MacroRegistry:
    """Single-writer / multi-reader store of MacroRecords."""

    def __init__(self):
        self._records: dict[int, MacroRecord] = {}
        self._next_id = 0
        self._revision = 0
        self._lock = threading.RLock()

    # -- queries ----------------------------------------------------------

    @property
    def revision(self) -> int:
        return self._revision

    def __len__(self):
        return len(self._records)

    def ids(self) -> list[int]:
        with self._lock:
            return sorted(self._records)

    def get(self, macro_id: int) -> MacroRecord:
        try:
            return self._records[macro_id]
        except KeyError:
            raise UnknownIdError(macro_id) from None

    def find_by_name(self, macro_name: str) -> MacroRecord | None:
        with self._lock:
            for record in self._records.values():
                if record.macro_name == macro_name:
                    return record
        return None

    def list_records(self) -> list[MacroRecord]:
        # snapshot under the lock so readers never see a mid-mutation dict
        with self._lock:
            return [self._records[i] for i in sorted(self._records)]

    def corpus_documents(self) -> list[tuple[int, str]]:
        """(id, matching text) per record, ordered by id.

        The text concatenates the title, the one-line description and the
        de-underscored macro name; call templates stay out of the corpus.
        """
        with self._lock:
            return [
                (i, self._records[i].corpus_text()) for i in sorted(self._records)
            ]

    # -- mutations ---------------------------------------------------------

    def add_macro(self, record: MacroRecord) -> int:
        with self._lock:
            if self.find_by_name(record.macro_name) is not None:
                raise DuplicateNameError(record.macro_name)
            validate_record(record)
            record.id = self._next_id
            if not record.created_at:
                record.created_at = _utc_now()
            self._records[record.id] = record
            self._next_id += 1
            self._revision += 1
            return record.id

    def remove_macro(self, macro_id: int) -> MacroRecord:
        with self._lock:
            record = self.get(macro_id)
            del self._records[macro_id]
            self._revision += 1  # next_id never reused
            return record

    def record_feedback(self, macro_id: int, outcome: str) -> FeedbackStats:
        if outcome not in ("success", "failure"):
            raise ValueError(f"outcome must be success|failure: {outcome!r}")
        with self._lock:
            record = self.get(macro_id)
            stats = record.stats
            record.stats = FeedbackStats(
                successes=stats.successes + (1 if outcome == "success" else 0),
                attempts=stats.attempts + 1,
            )
            return record.stats

    # -- persistence -------------------------------------------------------

    def to_document(self) -> dict:
        with self._lock:
            return {
                "version": SCHEMA_VERSION,
                "next_id": self._next_id,
                "macros": [asdict(r) for r in self.list_records()],
            }

    def save(self, path) -> None:
        document = self.to_document()
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(document, fh, indent=2, ensure_ascii=False)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "MacroRegistry":
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
        if not text.strip():
            raise SchemaError("registry file is empty")
        try:
            document = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from None
        return cls.from_document(document)

    @classmethod
    def from_document(cls, document) -> "MacroRegistry":
        if not isinstance(document, dict):
            raise SchemaError("top level must be an object")
        version = document.get("version")
        if version != SCHEMA_VERSION:
            raise SchemaError(f"unsupported version {version!r}", "version")
        next_id = document.get("next_id")
        if not isinstance(next_id, int) or next_id < 0:
            raise SchemaError("next_id must be a non-negative integer", "next_id")
        macros = document.get("macros")
        if not isinstance(macros, list):
            raise SchemaError("macros must be a list", "macros")

        registry = cls()
        seen_names = set()
        for idx, raw in enumerate(macros):
            where = f"macros[{idx}]"
            record = parse_record(raw, where, require_id=True)
            if record.id in registry._records:
                raise SchemaError(f"duplicate id {record.id}", where + ".id")
            if record.id >= next_id:
                raise SchemaError(
                    f"id {record.id} not below next_id {next_id}", where + ".id"
                )
            if record.macro_name in seen_names:
                raise SchemaError(
                    f"duplicate macro_name {record.macro_name}", where + ".macro_name"
                )
            try:
                validate_record(record)
            except (ValueError, InvalidTemplateError) as exc:
                raise SchemaError(str(exc), where) from None
            seen_names.add(record.macro_name)
            registry._records[record.id] = record
        registry._next_id = next_id
        registry._revision = 1 if macros else 0
        return registry


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _expect(raw: dict, key: str, types, where: str):
    if key not in raw:
        raise SchemaError(f"missing field {key}", where)
    value = raw[key]
    if not isinstance(value, types):
        raise SchemaError(f"field {key} has wrong type {type(value).__name__}", where)
    return value


def parse_record(raw, where: str, require_id: bool = True) -> MacroRecord:
    """Parse one macro object; with require_id=False, id and stats may be absent
    (drafts arriving over the API get both assigned by the registry)."""
    if not isinstance(raw, dict):
        raise SchemaError("macro entry must be an object", where)
    if require_id:
        macro_id = _expect(raw, "id", int, where)
    else:
        macro_id = raw.get("id") if isinstance(raw.get("id"), int) else None
    if require_id or "stats" in raw:
        stats_raw = _expect(raw, "stats", dict, where)
        successes = _expect(stats_raw, "successes", int, where + ".stats")
        attempts = _expect(stats_raw, "attempts", int, where + ".stats")
    else:
        successes = attempts = 0
    if successes < 0 or attempts < 0 or successes > attempts:
        raise SchemaError(
            f"invalid stats successes={successes} attempts={attempts}",
            where + ".stats",
        )
    params_raw = _expect(raw, "params", list, where) if require_id else raw.get("params") or []
    if not isinstance(params_raw, list):
        raise SchemaError("params must be a list", where)
    params = []
    for i, p in enumerate(params_raw):
        pw = f"{where}.params[{i}]"
        if not isinstance(p, dict):
            raise SchemaError("param must be an object", pw)
        params.append(
            ParamSpec(
                name=_expect(p, "name", str, pw),
                kind=_expect(p, "kind", str, pw),
                description=str(p.get("description", "")),
            )
        )
    calls_raw = _expect(raw, "call_templates", list, where) if require_id else raw.get("call_templates") or []
    if not isinstance(calls_raw, list):
        raise SchemaError("call_templates must be a list", where)
    calls = []
    for i, c in enumerate(calls_raw):
        cw = f"{where}.call_templates[{i}]"
        if not isinstance(c, dict):
            raise SchemaError("call template must be an object", cw)
        bindings = []
        for j, b in enumerate(c.get("output_bindings") or []):
            bw = f"{cw}.output_bindings[{j}]"
            if not isinstance(b, dict):
                raise SchemaError("output binding must be an object", bw)
            bindings.append(
                OutputBinding(
                    bind_name=_expect(b, "bind_name", str, bw),
                    path=_expect(b, "path", str, bw),
                )
            )
        headers = c.get("header_templates") or {}
        if not isinstance(headers, dict):
            raise SchemaError("header_templates must be an object", cw)
        calls.append(
            ApiCallTemplate(
                method=_expect(c, "method", str, cw),
                url_template=_expect(c, "url_template", str, cw),
                header_templates={str(k): str(v) for k, v in headers.items()},
                body_template=c.get("body_template"),
                output_bindings=bindings,
            )
        )
    specs = []
    for i, s in enumerate(raw.get("slot_specs") or []):
        sw = f"{where}.slot_specs[{i}]"
        if not isinstance(s, dict):
            raise SchemaError("slot spec must be an object", sw)
        fallback = s.get("fallback")
        if fallback in ("none", ""):
            fallback = None
        if fallback not in (None, "remainder"):
            raise SchemaError(f"unknown fallback {fallback!r}", sw)
        specs.append(
            SlotSpec(
                param=_expect(s, "param", str, sw),
                template=_expect(s, "template", str, sw),
                fallback=fallback,
            )
        )
    return MacroRecord(
        id=macro_id,
        use_case=_expect(raw, "use_case", str, where),
        scenario_description=_expect(raw, "scenario_description", str, where),
        macro_name=_expect(raw, "macro_name", str, where),
        params=params,
        call_templates=calls,
        slot_specs=specs,
        stats=FeedbackStats(successes=successes, attempts=attempts),
        created_at=str(raw.get("created_at", "")),
    )
