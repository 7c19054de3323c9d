"""Five-stage orchestration: identify, select, bind, execute, learn.

The Router owns a registry plus a vocabulary fitted over its matching corpus
(refitted whenever the registry revision moves). Selection blends cosine
similarity with a Laplace-smoothed execution success rate so that repeatedly
failing macros sink and zero-history macros sit at a neutral 0.5.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from datetime import datetime, timezone

from . import matcher, slots, vectorizer
from .errors import (
    EmptyDescriptionError,
    IllegalTransitionError,
    MissingSlotError,
    TypeMismatchError,
)
from .executor import ExecutionResult, Transport, execute, instantiate
from .registry import FeedbackStats, MacroRecord, MacroRegistry


@dataclass
class PipelineConfig:
    theta: float = 0.30  # minimum blended score for a match
    alpha: float = 0.80  # cosine weight in the blend
    tau: float = 0.50  # call-filter retention threshold
    stopwords: bool = True
    registry_path: str = ""
    port: int = 8080
    ui_dir: str = ""

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must be in [0,1]: {self.theta}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0,1]: {self.alpha}")

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {k: raw[k] for k in (
            "theta", "alpha", "tau", "stopwords", "registry_path", "port", "ui_dir",
        ) if k in raw}
        return cls(**known)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class FeedbackEvent:
    macro_id: int
    outcome: str  # success | failure
    source: str  # user | environment | model
    timestamp: str = ""

    def __post_init__(self):
        if self.source not in ("user", "environment", "model"):
            raise ValueError(f"unknown feedback source {self.source!r}")
        if self.outcome not in ("success", "failure"):
            raise ValueError(f"unknown outcome {self.outcome!r}")
        if not self.timestamp:
            self.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RankedMacro:
    id: int
    macro_name: str
    cosine: float
    blended: float


@dataclass
class RouteDecision:
    kind: str  # matched | no_match | needs_training
    macro_id: int | None = None
    macro_name: str | None = None
    score: float = 0.0
    bindings: dict[str, object] = field(default_factory=dict)
    missing_params: list[str] = field(default_factory=list)
    best_id: int | None = None
    best_score: float = 0.0
    ranked: list[RankedMacro] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def blended_score(cosine_score: float, stats: FeedbackStats, alpha: float) -> float:
    """alpha*cosine + (1-alpha)*(s+1)/(n+2); the smoothed rate is 0.5 with no history."""
    smoothed = (stats.successes + 1) / (stats.attempts + 2)
    return alpha * cosine_score + (1 - alpha) * smoothed


@dataclass
class HandleOutcome:
    decision: RouteDecision
    result: ExecutionResult | None = None  # None when nothing was executed


# Training-mode session states and their legal transitions.
DESCRIBED = "Described"
PROPOSED = "Proposed"
DRAFTING = "Drafting"
COMMITTED = "Committed"


@dataclass
class TrainingSession:
    description: str
    state: str = DESCRIBED
    proposals: list[matcher.MatchResult] = field(default_factory=list)
    draft: MacroRecord | None = None
    accepted_id: int | None = None
    committed_id: int | None = None

    def _require(self, expected: str, action: str):
        if self.state != expected:
            raise IllegalTransitionError(self.state, action)

    def mark_proposed(self, proposals: list[matcher.MatchResult]):
        self._require(DESCRIBED, "propose")
        self.proposals = proposals
        self.state = PROPOSED

    def accept_existing(self, macro_id: int):
        self._require(PROPOSED, "accept existing")
        self.accepted_id = macro_id
        self.state = COMMITTED

    def start_draft(self, draft: MacroRecord):
        self._require(PROPOSED, "start drafting")
        self.draft = draft
        self.state = DRAFTING

    def mark_committed(self, macro_id: int):
        self._require(DRAFTING, "commit")
        self.committed_id = macro_id
        self.state = COMMITTED


class Router:
    """One pipeline instance shared by the CLI and the HTTP service."""

    def __init__(self, registry: MacroRegistry, config: PipelineConfig | None = None):
        self.registry = registry
        self.config = config or PipelineConfig()
        self.events: list[FeedbackEvent] = []
        self._fitted_revision = -1
        self._vocab = None
        self._index: list[tuple[int, vectorizer.DocumentVector]] = []

    # -- vector index -------------------------------------------------------

    def _refresh(self):
        if self._fitted_revision == self.registry.revision:
            return
        docs = self.registry.corpus_documents()
        if docs:
            self._vocab = vectorizer.fit(
                [text for _, text in docs], self.config.stopwords
            )
            self._index = [
                (macro_id, vectorizer.transform(text, self._vocab))
                for macro_id, text in docs
            ]
        else:
            self._vocab = None
            self._index = []
        self._fitted_revision = self.registry.revision

    def vectorize(self, text: str) -> vectorizer.DocumentVector:
        self._refresh()
        if self._vocab is None:
            return {}
        return vectorizer.transform(text, self._vocab)

    def index(self) -> list[tuple[int, vectorizer.DocumentVector]]:
        self._refresh()
        return list(self._index)

    # -- routing ------------------------------------------------------------

    def route(self, utterance: str) -> RouteDecision:
        """Vectorize, blend cosine with feedback, threshold, bind slots."""
        self._refresh()
        if not self._index:
            return RouteDecision(kind="no_match", best_id=None, best_score=0.0)
        query = self.vectorize(utterance)
        if not query:
            # all-stopword/unknown text scores 0 everywhere: guaranteed NoMatch
            return RouteDecision(
                kind="no_match", best_id=min(i for i, _ in self._index), best_score=0.0
            )
        cosine_ranked = matcher.rank(query, self._index)
        ranked = [
            RankedMacro(
                id=r.id,
                macro_name=self.registry.get(r.id).macro_name,
                cosine=r.score,
                blended=blended_score(
                    r.score, self.registry.get(r.id).stats, self.config.alpha
                ),
            )
            for r in cosine_ranked
        ]
        ranked.sort(key=lambda r: (-r.blended, r.id))
        top = ranked[0]
        if top.blended < self.config.theta:
            return RouteDecision(
                kind="no_match", best_id=top.id, best_score=top.blended, ranked=ranked
            )
        record = self.registry.get(top.id)
        bindings: dict[str, object] = {}
        missing: list[str] = []
        try:
            raw = slots.extract(utterance, record.slot_specs)
            for binding in slots.validate(raw, record.params):
                bindings[binding.param] = binding.value
        except (MissingSlotError, TypeMismatchError) as exc:
            missing = [exc.param]
        return RouteDecision(
            kind="matched",
            macro_id=top.id,
            macro_name=record.macro_name,
            score=top.blended,
            bindings=bindings,
            missing_params=missing,
            best_id=top.id,
            best_score=top.blended,
            ranked=ranked,
        )

    def handle(self, utterance: str, transport: Transport) -> HandleOutcome:
        """route -> instantiate -> execute, then record environment feedback."""
        decision = self.route(utterance)
        if decision.kind != "matched":
            decision.kind = "needs_training"
            return HandleOutcome(decision=decision)
        if decision.missing_params:
            return HandleOutcome(decision=decision)
        record = self.registry.get(decision.macro_id)
        plan = instantiate(record.call_templates, decision.bindings)
        result = execute_with_feedback(self, record.id, plan, transport)
        return HandleOutcome(decision=decision, result=result)

    def plan_for(self, decision: RouteDecision):
        record = self.registry.get(decision.macro_id)
        return instantiate(record.call_templates, decision.bindings)

    def record_feedback(self, macro_id: int, outcome: str, source: str = "user"):
        stats = self.registry.record_feedback(macro_id, outcome)
        self.events.append(FeedbackEvent(macro_id=macro_id, outcome=outcome, source=source))
        return stats

    # -- training mode ------------------------------------------------------

    def training_propose(self, description: str, k: int = 3) -> TrainingSession:
        if not description.strip():
            raise EmptyDescriptionError("description must be non-empty")
        session = TrainingSession(description=description)
        query = self.vectorize(description)
        ranked = matcher.rank(query, self.index())
        session.mark_proposed(ranked[:k])
        return session

    def training_commit(self, session: TrainingSession) -> int:
        if session.state != DRAFTING or session.draft is None:
            raise IllegalTransitionError(session.state, "commit")
        macro_id = self.registry.add_macro(session.draft)
        session.mark_committed(macro_id)
        return macro_id


def execute_with_feedback(router: Router, macro_id: int, plan, transport) -> ExecutionResult:
    result = execute(plan, transport)
    outcome = "success" if result.succeeded else "failure"
    router.registry.record_feedback(macro_id, outcome)
    router.events.append(
        FeedbackEvent(macro_id=macro_id, outcome=outcome, source="environment")
    )
    return result
