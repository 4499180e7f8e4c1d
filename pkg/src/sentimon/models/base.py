"""Types shared by the classifiers."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ..corpus import N_CLASSES, Label
from ..errors import DimensionMismatch, EmptyTrainingSet
from ..features import SparseVector, to_csr


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for every trainer.

    ``max_epochs=None`` picks the trainer's own default (gradient steps for
    logistic regression, passes over the data for the SVM).
    ``learning_rate=None`` lets logistic regression derive a safe step from
    the data; the SVM always uses its decaying schedule.
    """

    c_value: float = 1.0
    alpha: float = 1.0
    max_epochs: int | None = None
    learning_rate: float | None = None
    tolerance: float = 1e-4
    seed: int = 42
    momentum: bool = True

    def __post_init__(self):
        if not self.c_value > 0:
            raise ValueError("c_value must be > 0")
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        if self.max_epochs is not None and self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.learning_rate is not None and not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass(frozen=True, eq=False)
class Prediction:
    label: Label
    scores: tuple[float, float, float]

    def __eq__(self, other):
        if not isinstance(other, Prediction):
            return NotImplemented
        # compare bit patterns so -inf == -inf and 0.0 != -0.0 are both exact
        return self.label == other.label and np.array_equal(
            np.asarray(self.scores).view(np.int64), np.asarray(other.scores).view(np.int64))


def argmax_label(scores: np.ndarray) -> np.ndarray:
    """Row-wise argmax; np.argmax already returns the lowest index on ties."""
    return np.argmax(scores, axis=1)


def as_matrix(X, dim: int | None = None) -> sp.csr_matrix:
    if sp.issparse(X):
        return sp.csr_matrix(X, dtype=np.float64)
    if isinstance(X, SparseVector):
        X = [X]
    X = list(X)
    return to_csr(X, None if X else dim)


def encode_labels(y: Sequence) -> np.ndarray:
    return np.fromiter((int(label) for label in y), dtype=np.int64, count=len(y))


def check_training_set(X: sp.csr_matrix, y: np.ndarray) -> None:
    if X.shape[0] == 0 or y.size == 0:
        raise EmptyTrainingSet("training set is empty")
    if X.shape[0] != y.size:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.size} labels")
    if y.min() < 0 or y.max() >= N_CLASSES:
        raise ValueError("labels must be encoded as 0, 1, 2")


def check_dim(X: sp.csr_matrix, dim: int) -> None:
    if X.shape[1] != dim:
        raise DimensionMismatch(f"input has dimension {X.shape[1]}, model expects {dim}")


def to_predictions(scores: np.ndarray) -> list[Prediction]:
    labels = argmax_label(scores)
    return [Prediction(Label(int(k)), tuple(float(s) for s in row))
            for k, row in zip(labels, scores)]
