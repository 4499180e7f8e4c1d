"""Multinomial naive Bayes with Lidstone smoothing.

Feature values are accumulated as (possibly fractional) counts, so the same
trainer serves raw term counts and TF-IDF weights.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ..corpus import N_CLASSES
from .base import as_matrix, check_dim, check_training_set, encode_labels, to_predictions


@dataclass(frozen=True, eq=False)
class NaiveBayesModel:
    class_log_prior: np.ndarray      # (3,); -inf for classes absent from training
    feature_log_prob: np.ndarray     # (3, V)
    alpha: float

    kind = "nb"

    @property
    def dim(self) -> int:
        return self.feature_log_prob.shape[1]

    def decision_scores(self, X) -> np.ndarray:
        """Normalized log posteriors, one row per input."""
        X = as_matrix(X, self.dim)
        check_dim(X, self.dim)
        joint = np.asarray(X @ self.feature_log_prob.T) + self.class_log_prior
        return joint - logsumexp(joint, axis=1, keepdims=True)

    def predict_many(self, X):
        return to_predictions(self.decision_scores(X))

    def predict(self, x):
        return self.predict_many(x)[0]


def train_nb(X, y, alpha: float = 1.0, dim: int | None = None) -> NaiveBayesModel:
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    X = as_matrix(X, dim)
    labels = encode_labels(y)
    check_training_set(X, labels)

    onehot = np.zeros((labels.size, N_CLASSES))
    onehot[np.arange(labels.size), labels] = 1.0
    class_count = onehot.sum(axis=0)
    feature_count = np.asarray((X.T @ onehot).T)          # (3, V)

    n_terms = X.shape[1]
    smoothed = feature_count + alpha
    totals = feature_count.sum(axis=1, keepdims=True) + alpha * n_terms
    # dividing first keeps hand-checkable ratios like 3/4 exact before the log
    feature_log_prob = np.log(smoothed / totals) if n_terms else smoothed
    with np.errstate(divide="ignore"):
        class_log_prior = np.log(class_count) - np.log(labels.size)
    return NaiveBayesModel(class_log_prior, feature_log_prob, float(alpha))
