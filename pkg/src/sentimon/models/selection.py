"""Stratified k-fold cross-validation and grid search over C."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from ..corpus import N_CLASSES
from ..errors import TooFewSamples
from ..evaluation import weighted_f1
from .base import TrainConfig, as_matrix, encode_labels
from .linear import LOGISTIC, SVM, train_logreg, train_svm

DEFAULT_GRID = (0.1, 1.0, 10.0)
DEFAULT_FOLDS = 5

TRAINERS: dict[str, Callable] = {LOGISTIC: train_logreg, SVM: train_svm}


@dataclass(frozen=True)
class CvRow:
    c_value: float
    mean: float
    std: float
    fold_scores: tuple[float, ...]


@dataclass(frozen=True)
class GridSearchResult:
    best_c: float
    cv_table: tuple[CvRow, ...]
    folds: int
    scoring: str = "f1_weighted"


def stratified_folds(y: Sequence, k: int = DEFAULT_FOLDS, seed: int = 42) -> list[np.ndarray]:
    """Split row indices into ``k`` folds that preserve class proportions.

    Each class is shuffled with the seed and dealt round-robin; the deal
    continues across classes so fold sizes differ by at most one.
    """
    if k < 2:
        raise ValueError("need at least 2 folds")
    labels = encode_labels(y)
    counts = np.bincount(labels, minlength=N_CLASSES)
    short = [c for c in range(N_CLASSES) if 0 < counts[c] < k]
    if short:
        raise TooFewSamples(
            f"class(es) {short} have fewer than {k} samples, so some fold would lack them")
    rng = np.random.default_rng(seed)
    assignment = np.empty(labels.size, dtype=np.int64)
    offset = 0
    for c in range(N_CLASSES):
        members = np.flatnonzero(labels == c)
        members = members[rng.permutation(members.size)]
        assignment[members] = (np.arange(members.size) + offset) % k
        offset += members.size
    return [np.flatnonzero(assignment == f) for f in range(k)]


def cross_val_scores(trainer, X, y, config: TrainConfig, folds: list[np.ndarray]) -> list[float]:
    X = as_matrix(X)
    labels = encode_labels(y)
    scores = []
    for test_idx in folds:
        train_mask = np.ones(labels.size, dtype=bool)
        train_mask[test_idx] = False
        model = trainer(X[train_mask], labels[train_mask], config)
        predicted = np.argmax(model.decision_scores(X[test_idx]), axis=1)
        scores.append(weighted_f1(labels[test_idx], predicted))
    return scores


def grid_search(trainer, X, y, grid: Sequence[float] = DEFAULT_GRID, k: int = DEFAULT_FOLDS,
                seed: int = 42, config: TrainConfig = TrainConfig(), n_jobs: int = 1) -> GridSearchResult:
    """Pick C by mean weighted F1 over stratified k-fold CV of the training set.

    ``trainer`` is ``"logreg"``, ``"svm"`` or a callable ``(X, y, config)``.
    Ties in the mean score go to the smaller C.
    """
    if isinstance(trainer, str):
        trainer = TRAINERS[trainer]
    grid = [float(c) for c in grid]
    if not grid:
        raise ValueError("grid must not be empty")
    X = as_matrix(X)
    folds = stratified_folds(y, k, seed)

    def run(c):
        return cross_val_scores(trainer, X, y, replace(config, c_value=c), folds)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            all_scores = list(pool.map(run, grid))
    else:
        all_scores = [run(c) for c in grid]

    table = tuple(
        CvRow(c, float(np.mean(s)), float(np.std(s)), tuple(s))
        for c, s in zip(grid, all_scores)
    )
    best = min(table, key=lambda row: (-row.mean, row.c_value))
    return GridSearchResult(best.c_value, table, k)
