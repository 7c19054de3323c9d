"""Parameter binding from raw utterances via anchored capture templates.

A slot template is literal text with exactly one ``{param}`` capture region,
e.g. ``"order {items} from the closest market"``. The text around the capture
acts as anchors that are searched case-insensitively in the utterance; the
capture is the maximal substring between them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MissingSlotError, TypeMismatchError

FALLBACK_REMAINDER = "remainder"


@dataclass
class SlotSpec:
    param: str
    template: str
    fallback: str | None = None  # None or "remainder"

    def anchors(self) -> tuple[str, str]:
        """Split the template into (prefix, suffix) around the capture region."""
        marker = "{" + self.param + "}"
        if marker not in self.template:
            raise ValueError(f"slot template for {self.param!r} lacks {marker}")
        prefix, _, suffix = self.template.partition(marker)
        return prefix.lower(), suffix.lower()


@dataclass
class Binding:
    param: str
    value: object  # str for text params, float for number params


@dataclass
class ParamSpec:
    name: str
    kind: str = "text"  # "text" | "number"
    description: str = ""


def extract(utterance: str, specs: list[SlotSpec]) -> dict[str, str]:
    """Fill every slot from the utterance, or raise MissingSlotError.

    Anchored specs are resolved first (first occurrence of the prefix anchor
    wins, capture extends to the last occurrence of the suffix anchor, or to
    the end of the utterance when the suffix is empty). A remainder-fallback
    spec then receives whatever text is left once all anchors and captures
    are removed.
    """
    folded = utterance.lower()
    captured: dict[str, str] = {}
    consumed: list[tuple[int, int]] = []  # spans of anchors + captures
    remainder_specs: list[SlotSpec] = []

    for spec in specs:
        prefix, suffix = spec.anchors()
        if not prefix and not suffix and spec.fallback == FALLBACK_REMAINDER:
            remainder_specs.append(spec)
            continue
        start = folded.find(prefix) if prefix else 0
        if start < 0:
            if spec.fallback == FALLBACK_REMAINDER:
                remainder_specs.append(spec)
                continue
            raise MissingSlotError(spec.param)
        cap_start = start + len(prefix)
        if suffix:
            cap_end = folded.rfind(suffix)
            if cap_end < cap_start:
                if spec.fallback == FALLBACK_REMAINDER:
                    remainder_specs.append(spec)
                    continue
                raise MissingSlotError(spec.param)
            span_end = cap_end + len(suffix)
        else:
            cap_end = len(folded)
            span_end = cap_end
        captured[spec.param] = folded[cap_start:cap_end].strip()
        consumed.append((start, span_end))

    for spec in remainder_specs:
        leftovers = []
        for i, ch in enumerate(folded):
            if not any(a <= i < b for a, b in consumed):
                leftovers.append(ch)
        captured[spec.param] = "".join(leftovers).strip()

    return captured


def validate(raw: dict[str, str], params: list[ParamSpec]) -> list[Binding]:
    """Check raw captures against the declared parameter kinds."""
    bindings = []
    for p in params:
        if p.name not in raw:
            raise MissingSlotError(p.name)
        value = raw[p.name]
        if p.kind == "number":
            try:
                bindings.append(Binding(p.name, float(value)))
            except ValueError:
                raise TypeMismatchError(p.name, value) from None
        else:
            bindings.append(Binding(p.name, value))
    return bindings
