"""Capped vocabulary fitting and L2-normalized TF-IDF sparse vectors."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

DEFAULT_MAX_FEATURES = 10_000

TFIDF = "tfidf"
COUNT = "count"
WEIGHTINGS = (TFIDF, COUNT)


@dataclass(frozen=True, eq=False)
class SparseVector:
    """Index-sorted (term index, weight) pairs of a ``dim``-wide vector."""

    indices: np.ndarray
    values: np.ndarray
    dim: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        if idx.shape != val.shape or idx.ndim != 1:
            raise ValueError("indices and values must be 1-d arrays of equal length")
        if idx.size:
            if np.any(np.diff(idx) <= 0):
                raise ValueError("indices must be strictly increasing")
            if idx[0] < 0 or idx[-1] >= self.dim:
                raise ValueError("index out of range")
            if not np.all(np.isfinite(val)):
                raise ValueError("weights must be finite")
            if np.any(val == 0.0):
                raise ValueError("explicit zero entries are not allowed")
        idx.setflags(write=False)
        val.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @classmethod
    def from_dict(cls, weights: dict[int, float], dim: int) -> "SparseVector":
        items = sorted((i, w) for i, w in weights.items() if w != 0.0)
        return cls(np.array([i for i, _ in items], dtype=np.int64),
                   np.array([w for _, w in items], dtype=np.float64), dim)

    @classmethod
    def from_dense(cls, dense: Sequence[float]) -> "SparseVector":
        arr = np.asarray(dense, dtype=np.float64)
        nz = np.flatnonzero(arr)
        return cls(nz, arr[nz], arr.size)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out

    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.indices.tolist(), self.values.tolist()))

    def norm(self) -> float:
        return math.sqrt(math.fsum(v * v for v in self.values.tolist()))

    def __len__(self):
        return int(self.indices.size)

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (self.dim == other.dim
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.values, other.values))

    def __repr__(self):
        return f"SparseVector(dim={self.dim}, entries={self.entries()})"


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]            # index -> term
    document_frequency: tuple[int, ...]
    max_features: int = DEFAULT_MAX_FEATURES

    def __post_init__(self):
        if len(self.terms) != len(self.document_frequency):
            raise ValueError("terms and document_frequency differ in length")
        if len(self.terms) > self.max_features:
            raise ValueError("vocabulary exceeds max_features")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.terms)})

    @property
    def term_to_index(self) -> dict[str, int]:
        return dict(self._index)

    def index(self, term: str) -> int | None:
        return self._index.get(term)

    def __len__(self):
        return len(self.terms)

    def __contains__(self, term):
        return term in self._index


def fit_vocabulary(corpus: Iterable[Sequence[str]], max_features: int = DEFAULT_MAX_FEATURES) -> Vocabulary:
    """Keep the ``max_features`` terms with the highest document frequency.

    Ties are broken by ascending term order, and indices follow the rank.
    """
    if max_features < 1:
        raise ValueError("max_features must be >= 1")
    df: Counter[str] = Counter()
    for tokens in corpus:
        df.update(set(tokens))
    ranked = sorted(df.items(), key=lambda item: (-item[1], item[0]))[:max_features]
    return Vocabulary(tuple(t for t, _ in ranked), tuple(n for _, n in ranked), max_features)


def idf_weight(df: int, n_docs: int) -> float:
    """Smoothed inverse document frequency, ``ln((1 + N) / (1 + df)) + 1``."""
    if not 0 <= df <= n_docs:
        raise ValueError(f"need 0 <= df <= n_docs, got df={df}, n_docs={n_docs}")
    return math.log((1 + n_docs) / (1 + df)) + 1.0


@dataclass(frozen=True, eq=False)
class TfIdfModel:
    vocabulary: Vocabulary
    idf: np.ndarray
    n_docs: int
    sublinear_tf: bool = False

    def __post_init__(self):
        idf = np.asarray(self.idf, dtype=np.float64)
        if idf.shape != (len(self.vocabulary),):
            raise ValueError("idf length must equal vocabulary size")
        idf.setflags(write=False)
        object.__setattr__(self, "idf", idf)

    @property
    def dim(self) -> int:
        return len(self.vocabulary)

    def __eq__(self, other):
        if not isinstance(other, TfIdfModel):
            return NotImplemented
        return (self.vocabulary == other.vocabulary and self.n_docs == other.n_docs
                and self.sublinear_tf == other.sublinear_tf
                and np.array_equal(self.idf, other.idf))


def fit_tfidf(corpus: Sequence[Sequence[str]], max_features: int = DEFAULT_MAX_FEATURES,
              sublinear_tf: bool = False) -> TfIdfModel:
    vocab = fit_vocabulary(corpus, max_features)
    n_docs = len(corpus)
    idf = np.array([idf_weight(df, n_docs) for df in vocab.document_frequency], dtype=np.float64)
    return TfIdfModel(vocab, idf, n_docs, sublinear_tf)


def transform(tokens: Sequence[str], model: TfIdfModel, weighting: str = TFIDF) -> SparseVector:
    """Vectorize one token sequence.

    ``tfidf`` gives count x idf scaled to unit L2 norm; ``count`` gives the
    raw in-vocabulary counts, unscaled. Out-of-vocabulary tokens are dropped.
    """
    if weighting not in WEIGHTINGS:
        raise ValueError(f"unknown weighting {weighting!r}")
    counts: Counter[int] = Counter()
    for tok in tokens:
        i = model.vocabulary.index(tok)
        if i is not None:
            counts[i] += 1
    if not counts:
        return SparseVector(np.empty(0, np.int64), np.empty(0), model.dim)
    idx = np.array(sorted(counts), dtype=np.int64)
    tf = np.array([counts[i] for i in idx.tolist()], dtype=np.float64)
    if weighting == COUNT:
        return SparseVector(idx, tf, model.dim)
    if model.sublinear_tf:
        tf = 1.0 + np.log(tf)
    weights = tf * model.idf[idx]
    norm = math.sqrt(math.fsum((weights * weights).tolist()))
    return SparseVector(idx, weights / norm, model.dim)


def transform_corpus(corpus: Iterable[Sequence[str]], model: TfIdfModel,
                     weighting: str = TFIDF) -> list[SparseVector]:
    return [transform(tokens, model, weighting) for tokens in corpus]


def to_csr(vectors: Sequence[SparseVector], dim: int | None = None) -> sp.csr_matrix:
    """Stack sparse vectors into an ``n x dim`` CSR matrix."""
    if dim is None:
        if not vectors:
            raise ValueError("dim is required for an empty list")
        dim = vectors[0].dim
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    for k, v in enumerate(vectors):
        if v.dim != dim:
            raise ValueError(f"vector {k} has dim {v.dim}, expected {dim}")
        indptr[k + 1] = indptr[k] + len(v)
    if vectors:
        indices = np.concatenate([v.indices for v in vectors])
        data = np.concatenate([v.values for v in vectors])
    else:
        indices = np.empty(0, np.int64)
        data = np.empty(0)
    return sp.csr_matrix((data, indices, indptr), shape=(len(vectors), dim))
