import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.feature_extraction.text import TfidfVectorizer

from sentimon.features import (
    COUNT,
    SparseVector,
    fit_tfidf,
    fit_vocabulary,
    idf_weight,
    to_csr,
    transform,
    transform_corpus,
)

_token_lists = st.lists(st.lists(st.sampled_from("abcdefghij"), max_size=12), max_size=25)


def test_vocabulary_order_and_cap():
    corpus = [["a", "b"], ["b", "c"], ["b"]]
    vocab = fit_vocabulary(corpus)
    assert vocab.terms == ("b", "a", "c")
    assert vocab.term_to_index == {"b": 0, "a": 1, "c": 2}
    assert vocab.document_frequency == (3, 1, 1)
    assert fit_vocabulary(corpus, max_features=1).term_to_index == {"b": 0}
    assert len(fit_vocabulary([])) == 0


def test_idf_values():
    assert idf_weight(3, 3) == 1.0
    # ln(4/2) + 1 and ln(4/1) + 1
    assert idf_weight(1, 3) == pytest.approx(1.6931471805599454, abs=1e-15)
    assert idf_weight(0, 3) == pytest.approx(2.386294361119891, abs=1e-15)
    with pytest.raises(ValueError):
        idf_weight(4, 3)


def test_transform_examples():
    model = fit_tfidf([["x", "y"], ["x", "y"], ["z"]])
    assert len(transform(["unseen"], model)) == 0
    assert transform(["unseen"], model).norm() == 0.0
    single = transform(["z"], model)
    assert single.values.tolist() == [1.0]
    pair = transform(["x", "y"], model)
    assert pair.values.tolist() == pytest.approx([1 / math.sqrt(2)] * 2, abs=1e-15)
    assert transform_corpus([], model) == []
    assert transform_corpus([["x"]], model) == [transform(["x"], model)]


def test_count_weighting():
    model = fit_tfidf([["x", "y"], ["y"]])
    vec = transform(["y", "y", "x", "zz"], model, COUNT)
    assert vec.to_dense().tolist() == [2.0, 1.0]


def test_matches_reference_vectorizer():
    rng = np.random.default_rng(0)
    words = [f"t{k}" for k in range(60)]
    docs = [[words[i] for i in rng.integers(0, 60, size=rng.integers(1, 15))] for _ in range(200)]
    model = fit_tfidf(docs)
    ours = to_csr(transform_corpus(docs, model), model.dim).toarray()
    ref = TfidfVectorizer(analyzer=lambda d: d, smooth_idf=True, norm="l2")
    theirs = ref.fit_transform(docs).toarray()
    # column order differs: map through the term names
    cols = [ref.vocabulary_[t] for t in model.vocabulary.terms]
    np.testing.assert_allclose(ours, theirs[:, cols], atol=1e-12)


def test_sparse_vector_validation():
    with pytest.raises(ValueError):
        SparseVector(np.array([1, 0]), np.array([1.0, 2.0]), 3)
    with pytest.raises(ValueError):
        SparseVector(np.array([3]), np.array([1.0]), 3)
    with pytest.raises(ValueError):
        SparseVector(np.array([0]), np.array([np.nan]), 3)
    vec = SparseVector.from_dict({2: 0.5, 0: 1.0, 1: 0.0}, 4)
    assert vec.indices.tolist() == [0, 2]
    assert SparseVector.from_dense(vec.to_dense()) == vec


@settings(max_examples=200)
@given(_token_lists, st.integers(1, 12))
def test_transform_invariants(corpus, cap):
    model = fit_tfidf(corpus, max_features=cap)
    assert model.dim <= cap
    for tokens in corpus:
        vec = transform(tokens, model)
        assert vec.dim == model.dim
        assert np.all(vec.values > 0)
        if len(vec):
            assert abs(vec.norm() - 1.0) <= 1e-9
        assert transform(list(reversed(tokens)), model) == vec
        # duplicating the whole document leaves the normalized vector unchanged
        np.testing.assert_allclose(transform(tokens * 2, model).to_dense(), vec.to_dense(), atol=1e-15)


@settings(max_examples=200)
@given(_token_lists)
def test_idf_monotone_in_df(corpus):
    model = fit_tfidf(corpus)
    df = np.array(model.vocabulary.document_frequency)
    order = np.argsort(df, kind="stable")
    assert np.all(np.diff(model.idf[order]) <= 0)
    assert np.all(model.idf >= 1.0)


def test_to_csr_shapes():
    model = fit_tfidf([["a"], ["b"]])
    X = to_csr(transform_corpus([["a"], [], ["a", "b"]], model), model.dim)
    assert X.shape == (3, 2)
    assert to_csr([], 5).shape == (0, 5)
    with pytest.raises(ValueError):
        to_csr([])
