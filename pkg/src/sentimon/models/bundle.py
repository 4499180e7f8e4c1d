"""A trained text classifier: preprocessing, vectorizer and model together."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import scipy.sparse as sp

from ..corpus import LabeledDocument, label_distribution
from ..features import COUNT, DEFAULT_MAX_FEATURES, TFIDF, TfIdfModel, fit_tfidf, to_csr, transform_corpus
from ..preprocess import DEFAULT_CONFIG, PreprocessConfig, preprocess_text
from .base import Prediction, TrainConfig
from .linear import LOGISTIC, SVM, LinearModel, train_logreg, train_svm
from .naive_bayes import NaiveBayesModel, train_nb

NB = "nb"
KINDS = (NB, LOGISTIC, SVM)


@dataclass(frozen=True, eq=False)
class ModelBundle:
    preprocess: PreprocessConfig
    tfidf: TfIdfModel
    classifier: NaiveBayesModel | LinearModel
    weighting: str = TFIDF
    model_version: str = field(default="unsaved", compare=False)

    @property
    def kind(self) -> str:
        return self.classifier.kind

    def vectorize(self, texts: Sequence[str]) -> sp.csr_matrix:
        tokens = [preprocess_text(t, self.preprocess) for t in texts]
        return to_csr(transform_corpus(tokens, self.tfidf, self.weighting), self.tfidf.dim)

    def predict_texts(self, texts: Sequence[str]) -> list[Prediction]:
        if not texts:
            return []
        return self.classifier.predict_many(self.vectorize(texts))

    def predict_text(self, text: str) -> Prediction:
        return self.predict_texts([text])[0]


@dataclass(frozen=True)
class TrainSummary:
    kind: str
    n_docs: int
    class_distribution: dict
    vocabulary_size: int
    objective: float | None
    n_iter: int | None


def train_bundle(
    docs: Sequence[LabeledDocument],
    kind: str,
    config: TrainConfig = TrainConfig(),
    preprocess: PreprocessConfig = DEFAULT_CONFIG,
    max_features: int = DEFAULT_MAX_FEATURES,
    nb_weighting: str = TFIDF,
) -> tuple[ModelBundle, TrainSummary]:
    """Fit the vocabulary on ``docs`` and train one classifier on top of it.

    ``nb_weighting`` selects TF-IDF weights or raw term counts as the naive
    Bayes event counts; linear models always see TF-IDF.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown model kind {kind!r}; choose from {KINDS}")
    if nb_weighting not in (TFIDF, COUNT):
        raise ValueError(f"unknown weighting {nb_weighting!r}")
    tokens = [preprocess_text(d.text, preprocess) for d in docs]
    tfidf = fit_tfidf(tokens, max_features)
    weighting = nb_weighting if kind == NB else TFIDF
    X = to_csr(transform_corpus(tokens, tfidf, weighting), tfidf.dim)
    y = [d.label for d in docs]
    if kind == NB:
        model = train_nb(X, y, config.alpha)
        objective = n_iter = None
    elif kind == LOGISTIC:
        model = train_logreg(X, y, config)
        objective, n_iter = model.objective, model.n_iter
    else:
        model = train_svm(X, y, config)
        objective, n_iter = model.objective, model.n_iter
    summary = TrainSummary(
        kind=kind,
        n_docs=len(docs),
        class_distribution={label.name_lower: n for label, n in label_distribution(docs).items()},
        vocabulary_size=tfidf.dim,
        objective=objective,
        n_iter=n_iter,
    )
    return ModelBundle(preprocess, tfidf, model, weighting), summary
