"""Loading, validating and splitting labeled social-media datasets.

The input format is an RFC-4180 CSV with the header
``textID,text,selected_text,sentiment`` (``selected_text`` may be absent).
"""
from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from enum import IntEnum
from typing import BinaryIO, Iterable, Sequence

import numpy as np

from .errors import InvalidRatio, IoFailure, MalformedRow, UnknownLabel

DEFAULT_SEED = 42
DEFAULT_RATIO = 0.8

FULL_HEADER = ("textID", "text", "selected_text", "sentiment")
SHORT_HEADER = ("textID", "text", "sentiment")


class Label(IntEnum):
    NEGATIVE = 0
    NEUTRAL = 1
    POSITIVE = 2

    @property
    def name_lower(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, value: str) -> "Label":
        try:
            return _LABEL_NAMES[value.strip().lower()]
        except KeyError:
            raise UnknownLabel(value) from None


_LABEL_NAMES = {label.name.lower(): label for label in Label}
LABELS = tuple(Label)
N_CLASSES = len(LABELS)


@dataclass(frozen=True)
class LabeledDocument:
    id: str
    text: str
    label: Label
    selected_text: str | None = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("document id must be non-empty")


@dataclass(frozen=True)
class DatasetSplit:
    train: list[LabeledDocument]
    test: list[LabeledDocument]
    seed: int
    ratio: float


def _open_source(source) -> tuple[BinaryIO, bool]:
    if isinstance(source, (bytes, bytearray)):
        return io.BytesIO(source), True
    if isinstance(source, (str, os.PathLike)):
        try:
            return open(source, "rb"), True
        except OSError as exc:
            raise IoFailure(f"cannot open {source}: {exc}") from exc
    return source, False


def load_csv(source) -> list[LabeledDocument]:
    """Parse a labeled CSV into documents, preserving file order.

    ``source`` may be a path, raw bytes, or a binary stream. Invalid UTF-8 is
    replaced rather than rejected; structural problems raise
    :class:`MalformedRow` with the 1-based record number (header is record 1).
    """
    stream, owned = _open_source(source)
    try:
        try:
            raw = stream.read()
        except OSError as exc:
            raise IoFailure(str(exc)) from exc
    finally:
        if owned:
            stream.close()
    if isinstance(raw, str):
        text = raw
    else:
        text = bytes(raw).decode("utf-8", errors="replace")
    if text.startswith("\ufeff"):
        text = text[1:]

    reader = csv.reader(io.StringIO(text, newline=""), strict=True)
    docs: list[LabeledDocument] = []
    try:
        header = next(reader, None)
        if header is None:
            return docs
        header = tuple(header)
        if header not in (FULL_HEADER, SHORT_HEADER):
            raise MalformedRow(1, f"unexpected header {list(header)}; expected {list(FULL_HEADER)}")
        has_selected = header == FULL_HEADER
        width = len(header)
        for record_no, row in enumerate(reader, start=2):
            if not row:
                continue  # blank line
            if len(row) != width:
                raise MalformedRow(record_no, f"expected {width} columns, got {len(row)}")
            if has_selected:
                doc_id, doc_text, selected, sentiment = row
            else:
                doc_id, doc_text, sentiment = row
                selected = None
            if not doc_id:
                raise MalformedRow(record_no, "empty textID")
            try:
                label = Label.parse(sentiment)
            except UnknownLabel:
                raise UnknownLabel(sentiment, record_no) from None
            docs.append(LabeledDocument(doc_id, doc_text, label, selected))
    except csv.Error as exc:
        raise MalformedRow(reader.line_num, f"unparseable CSV ({exc})") from exc
    return docs


def write_csv(docs: Iterable[LabeledDocument], sink: BinaryIO | None = None) -> bytes:
    """Serialize documents back to the input schema (always the 4-column form)."""
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(FULL_HEADER)
    for doc in docs:
        if "\x00" in doc.id + doc.text + (doc.selected_text or ""):
            raise ValueError(f"document {doc.id!r} contains a NUL character, which CSV cannot carry")
        writer.writerow([doc.id, doc.text, doc.selected_text or "", doc.label.name_lower])
    data = buf.getvalue().encode("utf-8")
    if sink is not None:
        sink.write(data)
    return data


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split(
    docs: Sequence[LabeledDocument],
    ratio: float = DEFAULT_RATIO,
    seed: int = DEFAULT_SEED,
) -> DatasetSplit:
    """Stratified, seeded train/test split.

    The overall train size is ``round(ratio * n)`` (half rounds up). Each
    class contributes ``floor(ratio * n_c)`` documents, and the remaining
    slots go to the classes with the largest fractional remainders, so every
    class lands on the floor or the ceiling of its share. Both halves keep
    the input order.
    """
    if not (0.0 < ratio < 1.0) or math.isnan(ratio):
        raise InvalidRatio(f"ratio must be in (0, 1), got {ratio}")
    if not docs:
        raise InvalidRatio("cannot split an empty dataset")
    if seed < 0:
        raise ValueError("seed must be non-negative")

    rng = np.random.default_rng(seed)
    by_class = [[i for i, d in enumerate(docs) if d.label == c] for c in LABELS]
    target = _round_half_up(ratio * len(docs))
    quotas = [math.floor(ratio * len(members)) for members in by_class]
    remainder = target - sum(quotas)
    fractions = [ratio * len(members) - q for members, q in zip(by_class, quotas)]
    # largest fraction first; class index breaks ties
    for c in sorted(range(N_CLASSES), key=lambda c: (-fractions[c], c))[:remainder]:
        quotas[c] += 1

    train_idx: list[int] = []
    for members, quota in zip(by_class, quotas):
        if members:
            order = rng.permutation(len(members))
            train_idx.extend(members[j] for j in order[:quota])
    chosen = set(train_idx)
    train = [d for i, d in enumerate(docs) if i in chosen]
    test = [d for i, d in enumerate(docs) if i not in chosen]
    return DatasetSplit(train=train, test=test, seed=seed, ratio=ratio)


def label_distribution(docs: Iterable[LabeledDocument]) -> dict[Label, int]:
    counts = {label: 0 for label in LABELS}
    for doc in docs:
        counts[doc.label] += 1
    return counts
