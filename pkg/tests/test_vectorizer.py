import math
import re

import pytest
from hypothesis import given, strategies as st

from macro_router.errors import EmptyCorpusError
from macro_router.vectorizer import fit, tokenize, transform


def test_tokenize_drops_stopwords_and_short_tokens():
    assert tokenize("Dim the lights at 8 PM!") == ["dim", "lights", "pm"]


def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_without_stopwords():
    assert tokenize("ORDER FROM NEARBY MARKET", stopwords_enabled=False) == [
        "order",
        "from",
        "nearby",
        "market",
    ]


def test_fit_counts_document_frequency():
    vocab = fit(["alpha beta", "alpha gamma"])
    assert vocab.n_docs == 2
    assert vocab.df == {"alpha": 2, "beta": 1, "gamma": 1}


def test_fit_single_document():
    vocab = fit(["alpha beta gamma alpha"])
    assert set(vocab.df.values()) == {1}


def test_fit_empty_corpus():
    with pytest.raises(EmptyCorpusError):
        fit([])


def test_fit_fixture_corpus_df_matches_word_count_oracle(fixture_registry):
    """df['based'] cross-checked with a scan that never touches the tokenizer."""
    texts = [text for _, text in fixture_registry.corpus_documents()]
    oracle = sum(
        1 for text in texts if "based" in re.findall(r"[a-z0-9]+", text.lower())
    )
    vocab = fit(texts)
    assert vocab.df["based"] == oracle == 9


def test_transform_matches_hand_computed_weights():
    vocab = fit(["alpha beta", "alpha gamma"])
    vec = transform("alpha beta", vocab)
    # idf(alpha)=ln(3/3)+1=1.0, idf(beta)=ln(3/2)+1; raw (1.0, 1.405465) normalized
    assert vec["alpha"] == pytest.approx(0.579739, abs=1e-6)
    assert vec["beta"] == pytest.approx(0.814802, abs=1e-6)


def test_transform_unknown_terms_only_gives_empty_vector():
    vocab = fit(["alpha beta", "alpha gamma"])
    assert transform("delta epsilon", vocab) == {}


def test_transform_is_deterministic():
    vocab = fit(["alpha beta", "alpha gamma"])
    text = "alpha alpha beta unknownword"
    assert transform(text, vocab) == transform(text, vocab)


def test_transform_is_bag_of_words():
    vocab = fit(["alpha beta gamma", "alpha delta"])
    assert transform("beta alpha gamma", vocab) == transform("gamma beta alpha", vocab)


words = st.sampled_from(
    ["alpha", "beta", "gamma", "delta", "omega", "kappa", "sigma", "lights", "market"]
)
texts = st.lists(words, min_size=1, max_size=12).map(" ".join)


@given(st.lists(texts, min_size=1, max_size=8), texts)
def test_nonempty_vectors_are_unit_norm(corpus, query):
    vocab = fit(corpus)
    vec = transform(query, vocab)
    if vec:
        norm = math.sqrt(sum(w * w for w in vec.values()))
        assert norm == pytest.approx(1.0, abs=1e-9)


@given(st.lists(texts, min_size=2, max_size=10))
def test_idf_strictly_positive_and_monotone(corpus):
    vocab = fit(corpus)
    for term in vocab.df:
        assert vocab.idf(term) > 0.0
    by_df = sorted(vocab.df.items(), key=lambda kv: kv[1])
    for (t1, df1), (t2, df2) in zip(by_df, by_df[1:]):
        if df1 < df2:
            assert vocab.idf(t1) > vocab.idf(t2)


def test_df_bounded_by_doc_count():
    vocab = fit(["alpha beta", "alpha gamma", "alpha"])
    assert all(1 <= df <= vocab.n_docs for df in vocab.df.values())
