"""End-to-end benchmark: split, train each classical model, score on the held-out part."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

from .corpus import DEFAULT_RATIO, DEFAULT_SEED, LabeledDocument, split
from .evaluation import ConfusionMatrix, MetricsReport, evaluate
from .features import COUNT, DEFAULT_MAX_FEATURES, TFIDF
from .models import LOGISTIC, NB, SVM, ModelBundle, TrainConfig, train_bundle
from .preprocess import DEFAULT_CONFIG, PreprocessConfig

# (row name, model kind, naive Bayes weighting)
DEFAULT_RUNS = (
    ("naive_bayes", NB, TFIDF),
    ("naive_bayes_counts", NB, COUNT),
    ("logistic_regression", LOGISTIC, TFIDF),
    ("svm", SVM, TFIDF),
)


@dataclass
class RunResult:
    name: str
    bundle: ModelBundle
    confusion: ConfusionMatrix
    report: MetricsReport
    train_seconds: float
    eval_seconds: float


@dataclass
class Benchmark:
    n_train: int
    n_test: int
    runs: list[RunResult]
    seconds: float

    def by_name(self, name: str) -> RunResult:
        return next(r for r in self.runs if r.name == name)


def run_benchmark(
    docs: Sequence[LabeledDocument],
    ratio: float = DEFAULT_RATIO,
    seed: int = DEFAULT_SEED,
    runs=DEFAULT_RUNS,
    config: TrainConfig = TrainConfig(),
    preprocess: PreprocessConfig = DEFAULT_CONFIG,
    max_features: int = DEFAULT_MAX_FEATURES,
) -> Benchmark:
    start = time.perf_counter()
    parts = split(docs, ratio, seed)
    results = []
    for name, kind, weighting in runs:
        t0 = time.perf_counter()
        bundle, _ = train_bundle(parts.train, kind, config, preprocess, max_features, weighting)
        t1 = time.perf_counter()
        cm, report = evaluate(bundle, parts.test, model=name)
        results.append(RunResult(name, bundle, cm, report, t1 - t0, time.perf_counter() - t1))
    return Benchmark(len(parts.train), len(parts.test), results, time.perf_counter() - start)
