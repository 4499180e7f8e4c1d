"""Confusion matrices, metric reports and their renderings.

Matrices are oriented rows = true label, columns = predicted label, in the
order negative, neutral, positive.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import LABELS, N_CLASSES, Label
from .errors import EmptyMatrix, LengthMismatch

FORMATS = ("plain-table", "csv", "json-lines")

_SHORT = {Label.NEGATIVE: "neg", Label.NEUTRAL: "neu", Label.POSITIVE: "pos"}
CSV_COLUMNS = (
    ["model", "accuracy",
     "precision_weighted", "recall_weighted", "f1_weighted",
     "precision_macro", "recall_macro", "f1_macro"]
    + [f"cm_{_SHORT[t]}_{_SHORT[p]}" for t in LABELS for p in LABELS]
)


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    cells: np.ndarray

    def __post_init__(self):
        cells = np.array(self.cells, dtype=np.int64)
        if cells.shape != (N_CLASSES, N_CLASSES):
            raise ValueError(f"confusion matrix must be {N_CLASSES}x{N_CLASSES}")
        if np.any(cells < 0):
            raise ValueError("confusion counts must be non-negative")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def total(self) -> int:
        return int(self.cells.sum())

    def __getitem__(self, key):
        t, p = key
        return int(self.cells[int(t), int(p)])

    def __eq__(self, other):
        return isinstance(other, ConfusionMatrix) and np.array_equal(self.cells, other.cells)

    def tolist(self) -> list[list[int]]:
        return self.cells.tolist()


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class Averages:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    per_class: dict[Label, ClassMetrics]
    macro: Averages
    weighted: Averages
    support: dict[Label, int]
    total: int
    zero_division: bool = False     # a precision or recall was 0/0 and reported as 0
    model: str = ""


def confusion(y_true: Sequence, y_pred: Sequence) -> ConfusionMatrix:
    if len(y_true) != len(y_pred):
        raise LengthMismatch(f"{len(y_true)} true labels vs {len(y_pred)} predictions")
    if not len(y_true):
        raise LengthMismatch("need at least one prediction")
    t = np.fromiter((int(v) for v in y_true), dtype=np.int64, count=len(y_true))
    p = np.fromiter((int(v) for v in y_pred), dtype=np.int64, count=len(y_pred))
    cells = np.bincount(t * N_CLASSES + p, minlength=N_CLASSES * N_CLASSES)
    return ConfusionMatrix(cells.reshape(N_CLASSES, N_CLASSES))


def _ratio(num: int, den: int) -> tuple[float, bool]:
    return (num / den, False) if den else (0.0, True)


def metrics(cm: ConfusionMatrix, model: str = "") -> MetricsReport:
    """Accuracy plus per-class, macro and support-weighted precision/recall/F1.

    Any 0/0 is reported as 0 and sets ``zero_division``.
    """
    total = cm.total
    if total == 0:
        raise EmptyMatrix("confusion matrix has no entries")
    cells = cm.cells
    rowsum = cells.sum(axis=1)
    colsum = cells.sum(axis=0)
    per_class = {}
    flagged = False
    for c in LABELS:
        tp = int(cells[c, c])
        precision, z1 = _ratio(tp, int(colsum[c]))
        recall, z2 = _ratio(tp, int(rowsum[c]))
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        flagged |= z1 or z2
        per_class[c] = ClassMetrics(precision, recall, f1, int(rowsum[c]))

    def average(weights):
        return Averages(*(sum(w * getattr(per_class[c], name) for c, w in zip(LABELS, weights))
                          for name in ("precision", "recall", "f1")))

    macro = average([1.0 / N_CLASSES] * N_CLASSES)
    weighted = average([int(rowsum[c]) / total for c in LABELS])
    return MetricsReport(
        accuracy=int(np.trace(cells)) / total,
        per_class=per_class,
        macro=macro,
        weighted=weighted,
        support={c: int(rowsum[c]) for c in LABELS},
        total=total,
        zero_division=flagged,
        model=model,
    )


def weighted_f1(y_true, y_pred) -> float:
    return metrics(confusion(y_true, y_pred)).weighted.f1


def evaluate(bundle, test, model: str | None = None) -> tuple[ConfusionMatrix, MetricsReport]:
    """Run the bundle's full text pipeline over labeled documents and score it."""
    if not test:
        raise EmptyMatrix("test set is empty")
    predictions = bundle.predict_texts([doc.text for doc in test])
    cm = confusion([doc.label for doc in test], [p.label for p in predictions])
    return cm, metrics(cm, model if model is not None else bundle.kind)


# -- rendering -------------------------------------------------------------

def _csv_row(cm: ConfusionMatrix, r: MetricsReport) -> list:
    row = [r.model, r.accuracy,
           r.weighted.precision, r.weighted.recall, r.weighted.f1,
           r.macro.precision, r.macro.recall, r.macro.f1]
    row += cm.cells.ravel().tolist()
    return [repr(v) if isinstance(v, float) else v for v in row]


def _json_object(cm: ConfusionMatrix, r: MetricsReport) -> dict:
    return {
        "model": r.model,
        "accuracy": r.accuracy,
        "total": r.total,
        "zero_division": r.zero_division,
        "weighted": {"precision": r.weighted.precision, "recall": r.weighted.recall, "f1": r.weighted.f1},
        "macro": {"precision": r.macro.precision, "recall": r.macro.recall, "f1": r.macro.f1},
        "per_class": {
            c.name_lower: {"precision": m.precision, "recall": m.recall, "f1": m.f1, "support": m.support}
            for c, m in r.per_class.items()
        },
        "labels": [c.name_lower for c in LABELS],
        "confusion": cm.tolist(),
    }


def _plain_table(cm: ConfusionMatrix, r: MetricsReport) -> str:
    lines = [f"model: {r.model or '-'}   documents: {r.total}"]
    lines.append(f"{'metric':<22}{'value':>10}")
    for name, value in [
        ("accuracy", r.accuracy),
        ("precision_weighted", r.weighted.precision),
        ("recall_weighted", r.weighted.recall),
        ("f1_weighted", r.weighted.f1),
        ("precision_macro", r.macro.precision),
        ("recall_macro", r.macro.recall),
        ("f1_macro", r.macro.f1),
    ]:
        lines.append(f"{name:<22}{value:>10.4f}")
    lines.append("")
    lines.append(f"{'class':<10}{'precision':>10}{'recall':>10}{'f1':>10}{'support':>9}")
    for c, m in r.per_class.items():
        lines.append(f"{c.name_lower:<10}{m.precision:>10.4f}{m.recall:>10.4f}{m.f1:>10.4f}{m.support:>9d}")
    lines.append("")
    lines.append("confusion (rows = true, columns = predicted)")
    lines.append(" " * 10 + "".join(f"{_SHORT[p]:>8}" for p in LABELS))
    for t in LABELS:
        lines.append(f"{_SHORT[t]:<10}" + "".join(f"{cm[t, p]:>8d}" for p in LABELS))
    if r.zero_division:
        lines.append("warning: some metrics were 0/0 and are reported as 0")
    return "\n".join(lines) + "\n"


def render_report(results, fmt: str = "plain-table") -> bytes:
    """Render one ``(cm, report)`` pair or a list of them."""
    if isinstance(results, tuple):
        results = [results]
    if fmt == "csv":
        buf = io.StringIO(newline="")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for cm, r in results:
            writer.writerow(_csv_row(cm, r))
        return buf.getvalue().encode("utf-8")
    if fmt == "json-lines":
        return "".join(json.dumps(_json_object(cm, r), sort_keys=True) + "\n"
                       for cm, r in results).encode("utf-8")
    if fmt == "plain-table":
        return "\n".join(_plain_table(cm, r) for cm, r in results).encode("utf-8")
    raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")


def parse_report(data: bytes, fmt: str) -> list[tuple[ConfusionMatrix, MetricsReport]]:
    """Inverse of :func:`render_report` for the machine formats.

    Derived fields are recomputed from the confusion cells and checked
    against the rendered values.
    """
    out = []
    text = data.decode("utf-8")
    if fmt == "csv":
        for row in csv.DictReader(io.StringIO(text, newline="")):
            cells = [[int(row[f"cm_{_SHORT[t]}_{_SHORT[p]}"]) for p in LABELS] for t in LABELS]
            cm = ConfusionMatrix(cells)
            report = metrics(cm, row["model"])
            rendered = dict(zip(CSV_COLUMNS, _csv_row(cm, report)))
            mismatched = [k for k in CSV_COLUMNS if str(rendered[k]) != row[k]]
            if mismatched:
                raise ValueError(f"CSV fields inconsistent with confusion cells: {mismatched}")
            out.append((cm, report))
    elif fmt == "json-lines":
        for line in text.splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            cm = ConfusionMatrix(obj["confusion"])
            report = metrics(cm, obj["model"])
            if _json_object(cm, report) != obj:
                raise ValueError("JSON fields inconsistent with confusion cells")
            out.append((cm, report))
    else:
        raise ValueError(f"{fmt!r} is not a machine-readable format")
    return out


def report_schema() -> dict:
    from importlib import resources

    return json.loads(resources.files("sentimon.data").joinpath("report.schema.json").read_text("utf-8"))
