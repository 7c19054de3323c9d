"""Text to sparse vectors: tokenization, document-frequency fitting, TF-IDF.

Weighting is raw term count times smoothed inverse document frequency,
idf(t) = ln((1+N)/(1+df_t)) + 1, followed by L2 normalization. The smoothing
keeps every in-vocabulary term strictly positive, which matters on a corpus
of a few dozen one-line descriptions where common words would otherwise
vanish entirely.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Protocol

from .errors import EmptyCorpusError

# term -> weight, L2-normalized unless empty
DocumentVector = dict[str, float]

_SPLIT_RE = re.compile(r"[^0-9a-z]+")


def _load_stopwords() -> frozenset[str]:
    text = resources.files(__package__).joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


STOPWORDS = _load_stopwords()


def tokenize(text: str, stopwords_enabled: bool = True) -> list[str]:
    """Lowercase, split on non-alphanumerics, drop 1-char tokens and stopwords."""
    tokens = [t for t in _SPLIT_RE.split(text.lower()) if len(t) >= 2]
    if stopwords_enabled:
        tokens = [t for t in tokens if t not in STOPWORDS]
    return tokens


@dataclass
class Vocabulary:
    n_docs: int
    df: dict[str, int] = field(default_factory=dict)
    stopwords_enabled: bool = True

    def idf(self, term: str) -> float:
        return math.log((1 + self.n_docs) / (1 + self.df[term])) + 1.0


def fit(corpus: list[str], stopwords_enabled: bool = True) -> Vocabulary:
    """Count, for each distinct token, the number of documents containing it."""
    if not corpus:
        raise EmptyCorpusError("cannot fit a vocabulary on an empty corpus")
    df: dict[str, int] = {}
    for text in corpus:
        for term in set(tokenize(text, stopwords_enabled)):
            df[term] = df.get(term, 0) + 1
    return Vocabulary(n_docs=len(corpus), df=df, stopwords_enabled=stopwords_enabled)


def transform(text: str, vocab: Vocabulary) -> DocumentVector:
    """TF-IDF weights for the text, L2-normalized; unknown terms are dropped.

    A text with no in-vocabulary tokens yields the empty vector.
    """
    counts: dict[str, int] = {}
    for term in tokenize(text, vocab.stopwords_enabled):
        if term in vocab.df:
            counts[term] = counts.get(term, 0) + 1
    weights = {term: tf * vocab.idf(term) for term, tf in counts.items()}
    norm = math.sqrt(sum(w * w for w in weights.values()))
    if norm == 0.0:
        return {}
    return {term: w / norm for term, w in weights.items()}


class EmbeddingProvider(Protocol):
    """Alternative text-to-vector backends (e.g. model embeddings) plug in here.

    Implementations map text to a sparse term->weight map; the default build
    ships only the TF-IDF provider below.
    """

    def __call__(self, text: str) -> DocumentVector: ...


def tfidf_provider(vocab: Vocabulary) -> Callable[[str], DocumentVector]:
    return lambda text: transform(text, vocab)
