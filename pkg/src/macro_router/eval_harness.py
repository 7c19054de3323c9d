"""Replay the classification experiment: 100 labeled utterances vs the
15-row database, scored top-1, with threshold calibration.

Fixture files live in a directory as ``macros.json`` (registry schema) and
``utterances.jsonl`` (one ``{"text", "label"}`` object per line, label being
a macro_name or ``OUT_OF_SCOPE``). A few source items are ambiguously listed
in the original material; they carry ``"disputed": true`` and stay out of the
accuracy denominator.

Routing here uses pure cosine (alpha=1): all fixture stats are zero, so the
feedback blend would only shift scores without changing the argmax.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .errors import FixtureError
from .pipeline import PipelineConfig, Router
from .registry import MacroRegistry

OUT_OF_SCOPE = "OUT_OF_SCOPE"
NO_MATCH = "NO_MATCH"
_THETA_GRID = [round(i / 100, 2) for i in range(101)]


@dataclass
class LabeledUtterance:
    text: str
    label: int | None  # macro id, or None when out of scope
    disputed: bool = False


@dataclass
class EvalReport:
    in_scope_accuracy: float
    out_of_scope_nomatch_rate: float
    confusion: dict[str, dict[str, int]]
    chosen_theta: float
    n_in_scope: int
    n_out_of_scope: int
    n_disputed: int

    def to_dict(self) -> dict:
        return {
            "in_scope_accuracy": self.in_scope_accuracy,
            "out_of_scope_nomatch_rate": self.out_of_scope_nomatch_rate,
            "confusion": self.confusion,
            "chosen_theta": self.chosen_theta,
            "n_in_scope": self.n_in_scope,
            "n_out_of_scope": self.n_out_of_scope,
            "n_disputed": self.n_disputed,
        }

    def table(self) -> str:
        lines = [
            f"{'true class':<34} {'correct':>7} {'wrong':>6} {'no_match':>8}",
            "-" * 58,
        ]
        for label, row in self.confusion.items():
            correct = row.get(label, 0)
            nomatch = row.get(NO_MATCH, 0)
            wrong = sum(v for k, v in row.items() if k not in (label, NO_MATCH))
            lines.append(f"{label:<34} {correct:>7} {wrong:>6} {nomatch:>8}")
        lines.append("-" * 58)
        lines.append(f"in-scope top-1 accuracy:   {self.in_scope_accuracy:.3f}")
        lines.append(f"out-of-scope NoMatch rate: {self.out_of_scope_nomatch_rate:.3f}")
        lines.append(f"theta:                     {self.chosen_theta:.2f}")
        return "\n".join(lines)


@dataclass
class Calibration:
    theta: float
    feasible: bool
    in_scope_accuracy: float
    out_of_scope_nomatch_rate: float


def load_fixtures(directory) -> tuple[MacroRegistry, list[LabeledUtterance]]:
    macros_path = os.path.join(directory, "macros.json")
    utterances_path = os.path.join(directory, "utterances.jsonl")
    for path in (macros_path, utterances_path):
        if not os.path.exists(path):
            raise FixtureError(f"missing fixture file {path}")
    registry = MacroRegistry.load(macros_path)
    by_name = {r.macro_name: r.id for r in registry.list_records()}
    utterances = []
    with open(utterances_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FixtureError(f"bad JSON on line {lineno}: {exc}") from None
            text = raw.get("text")
            label = raw.get("label")
            if not isinstance(text, str) or not isinstance(label, str):
                raise FixtureError(f"line {lineno} needs string text and label")
            if label == OUT_OF_SCOPE:
                resolved = None
            elif label in by_name:
                resolved = by_name[label]
            else:
                raise FixtureError(f"line {lineno}: unknown label {label!r}")
            utterances.append(
                LabeledUtterance(
                    text=text, label=resolved, disputed=bool(raw.get("disputed"))
                )
            )
    return registry, utterances


def _top1_scores(
    registry: MacroRegistry,
    utterances: list[LabeledUtterance],
    stopwords: bool = True,
) -> list[tuple[LabeledUtterance, int | None, float]]:
    """Cosine argmax id and score per utterance (id None on an empty registry)."""
    router = Router(registry, PipelineConfig(theta=0.0, alpha=1.0, stopwords=stopwords))
    out = []
    for utterance in utterances:
        decision = router.route(utterance.text)
        out.append((utterance, decision.best_id, decision.best_score))
    return out


def run_eval(
    registry: MacroRegistry,
    utterances: list[LabeledUtterance],
    config: PipelineConfig,
) -> EvalReport:
    """Score every utterance at config.theta; disputed items are reported
    in no counter."""
    names = {r.id: r.macro_name for r in registry.list_records()}
    labels = [names[i] for i in sorted(names)] + [OUT_OF_SCOPE]
    confusion = {label: {} for label in labels}

    in_scope = correct = oos = oos_nomatch = disputed = 0
    for utterance, top_id, top_score in _top1_scores(
        registry, utterances, config.stopwords
    ):
        if utterance.disputed:
            disputed += 1
            continue
        matched = top_id is not None and top_score >= config.theta
        predicted = names[top_id] if matched else NO_MATCH
        true = OUT_OF_SCOPE if utterance.label is None else names[utterance.label]
        confusion[true][predicted] = confusion[true].get(predicted, 0) + 1
        if utterance.label is None:
            oos += 1
            if not matched:
                oos_nomatch += 1
        else:
            in_scope += 1
            if matched and top_id == utterance.label:
                correct += 1
    return EvalReport(
        in_scope_accuracy=correct / in_scope if in_scope else 0.0,
        out_of_scope_nomatch_rate=oos_nomatch / oos if oos else 0.0,
        confusion=confusion,
        chosen_theta=config.theta,
        n_in_scope=in_scope,
        n_out_of_scope=oos,
        n_disputed=disputed,
    )


def calibrate_theta(
    registry: MacroRegistry,
    utterances: list[LabeledUtterance],
    oos_floor: float = 0.75,
) -> Calibration:
    """Sweep theta over {0.00 .. 1.00} and pick the accuracy-maximizing value
    whose out-of-scope NoMatch rate clears the floor; ties take the smallest
    theta. When no theta is feasible, the best unconstrained point is
    returned flagged infeasible.
    """
    scored = [
        (u, top_id, top_score)
        for u, top_id, top_score in _top1_scores(registry, utterances)
        if not u.disputed
    ]
    n_in = sum(1 for u, _, _ in scored if u.label is not None)
    n_oos = sum(1 for u, _, _ in scored if u.label is None)

    best = None  # (accuracy, -theta) maximization via tuple compare
    best_unconstrained = None
    for theta in _THETA_GRID:
        correct = sum(
            1
            for u, top_id, score in scored
            if u.label is not None and top_id == u.label and score >= theta
        )
        nomatch = sum(
            1
            for u, _, score in scored
            if u.label is None and not score >= theta
        )
        accuracy = correct / n_in if n_in else 0.0
        oos_rate = nomatch / n_oos if n_oos else 1.0  # vacuous without OOS items
        candidate = Calibration(theta, oos_rate >= oos_floor, accuracy, oos_rate)
        if best_unconstrained is None or accuracy > best_unconstrained.in_scope_accuracy:
            best_unconstrained = candidate
        if candidate.feasible and (best is None or accuracy > best.in_scope_accuracy):
            best = candidate
    if best is not None:
        return best
    infeasible = Calibration(
        best_unconstrained.theta,
        False,
        best_unconstrained.in_scope_accuracy,
        best_unconstrained.out_of_scope_nomatch_rate,
    )
    return infeasible
