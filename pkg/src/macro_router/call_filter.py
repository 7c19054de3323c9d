"""Utility filter for candidate API calls.

A candidate call is worth keeping when injecting its text (the call plus its
response) at position i makes the following tokens more predictable. The cost
of a window starting at i is the weighted negative log-likelihood

    L_i(z) = - sum_k w_k * ln p(x_{i+k} | z, x_{1:i+k-1})

with weights decreasing in k and renormalized to sum to 1 over the window.
The gain of a candidate is L_i(empty) - L_i(z); candidates whose gain clears
the retention threshold survive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import log
from typing import Protocol


class TokenProbabilityOracle(Protocol):
    """p(next token | preceding tokens, injected context) in (0, 1]."""

    def prob(self, token: str, prefix: list[str], context: str) -> float: ...


@dataclass
class LossParams:
    window: int = 5
    decay: float = 0.2  # w_k = max(0, 1 - decay*k) before renormalization
    retention_threshold: float = 0.5

    def weights(self, length: int) -> list[float]:
        raw = [max(0.0, 1.0 - self.decay * k) for k in range(length)]
        total = sum(raw)
        if total == 0.0:
            raise ValueError("all window weights are zero")
        return [w / total for w in raw]


@dataclass
class CandidateCall:
    position: int
    context: str  # the call-plus-response text injected at the position


@dataclass
class TableOracle:
    """Deterministic test oracle: (context, token) -> probability, with a default.

    Lookup falls back to the context-free entry, then to the default. Real
    language-model oracles implement the same protocol as integration points.
    """

    table: dict[tuple[str, str], float] = field(default_factory=dict)
    default: float = 0.5

    def prob(self, token: str, prefix: list[str], context: str) -> float:
        if (context, token) in self.table:
            return self.table[(context, token)]
        if ("", token) in self.table:
            return self.table[("", token)]
        return self.default


def weighted_loss(
    tokens: list[str],
    position: int,
    context: str,
    oracle: TokenProbabilityOracle,
    params: LossParams,
) -> float:
    """Weighted negative log-likelihood of the window starting at position."""
    if not 0 <= position < len(tokens):
        raise ValueError(f"position {position} outside token sequence")
    window = tokens[position : position + params.window]
    weights = params.weights(len(window))
    loss = 0.0
    for k, token in enumerate(window):
        p = oracle.prob(token, tokens[: position + k], context)
        if not 0.0 < p <= 1.0:
            raise ValueError(f"oracle probability out of (0,1]: {p}")
        loss -= weights[k] * log(p)
    return loss


def utility_gain(
    tokens: list[str],
    candidate: CandidateCall,
    oracle: TokenProbabilityOracle,
    params: LossParams,
) -> float:
    """Loss reduction from injecting the candidate's context; negative if it hurts."""
    base = weighted_loss(tokens, candidate.position, "", oracle, params)
    with_call = weighted_loss(tokens, candidate.position, candidate.context, oracle, params)
    return base - with_call


def filter_calls(
    tokens: list[str],
    candidates: list[CandidateCall],
    oracle: TokenProbabilityOracle,
    params: LossParams,
) -> list[CandidateCall]:
    """Keep candidates whose gain meets the retention threshold, in order."""
    return [
        c
        for c in candidates
        if utility_gain(tokens, c, oracle, params) >= params.retention_threshold
    ]
