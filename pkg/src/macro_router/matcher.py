"""Cosine scoring, corpus ranking and the two-level category selection."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import EmptyCatalogError
from .vectorizer import DocumentVector


@dataclass
class MatchResult:
    id: int
    score: float
    rank: int  # 1-based


@dataclass
class Category:
    name: str
    member_ids: list[int]
    centroid: DocumentVector


def cosine(a: DocumentVector, b: DocumentVector) -> float:
    """A.B / (|A||B|); 0 when either vector is empty."""
    if not a or not b:
        return 0.0
    if len(b) < len(a):
        a, b = b, a
    dot = sum(w * b[t] for t, w in a.items() if t in b)
    norm_a = math.sqrt(sum(w * w for w in a.values()))
    norm_b = math.sqrt(sum(w * w for w in b.values()))
    return dot / (norm_a * norm_b)


def rank(
    query: DocumentVector, index: list[tuple[int, DocumentVector]]
) -> list[MatchResult]:
    """Score every index entry; sort by descending score, ties by ascending id."""
    scored = [(item_id, cosine(query, vec)) for item_id, vec in index]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return [
        MatchResult(id=item_id, score=score, rank=position)
        for position, (item_id, score) in enumerate(scored, start=1)
    ]


def centroid_of(vectors: list[DocumentVector]) -> DocumentVector:
    """L2-normalized mean of member vectors (members must be non-empty)."""
    if not vectors:
        raise ValueError("centroid of zero members")
    sums: dict[str, float] = {}
    for vec in vectors:
        for term, w in vec.items():
            sums[term] = sums.get(term, 0.0) + w
    mean = {t: w / len(vectors) for t, w in sums.items()}
    norm = math.sqrt(sum(w * w for w in mean.values()))
    if norm == 0.0:
        return {}
    return {t: w / norm for t, w in mean.items()}


def two_level_select(
    query: DocumentVector,
    categories: list[Category],
    index: list[tuple[int, DocumentVector]],
) -> tuple[str, MatchResult]:
    """Pick the category whose centroid best matches, then rank inside it.

    Category ties break lexicographically by name; empty catalogs error.
    """
    if not categories:
        raise EmptyCatalogError("no categories to select from")
    for cat in categories:
        if not cat.member_ids:
            raise EmptyCatalogError(f"category {cat.name!r} has no members")
    best = min(categories, key=lambda c: (-cosine(query, c.centroid), c.name))
    members = set(best.member_ids)
    within = [(i, v) for i, v in index if i in members]
    results = rank(query, within)
    return best.name, results[0]
