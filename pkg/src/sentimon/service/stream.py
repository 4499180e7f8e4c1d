"""Stream classification and windowed sentiment-trend aggregation.

Records arrive as NDJSON objects ``{"id", "text", "ts"?}``. Each one is
anonymized, classified with the loaded bundle, and counted in a tumbling
event-time window. Anything that cannot be processed becomes a
:class:`DeadLetter`; nothing is dropped silently, so at all times

    ingested == classified + dead_lettered
    classified == sum(retained bucket counts) + dropped_late
"""
from __future__ import annotations

import hashlib
import hmac
import json
import logging
import math
import os
import threading
import time
from collections import deque
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Iterator

from ..corpus import N_CLASSES, Label
from ..errors import InvalidRange
from ..preprocess import MENTION_PATTERN

log = logging.getLogger(__name__)

ANON_KEY_ENV = "SENTIMON_ANON_KEY"
DEFAULT_ANON_KEY = b"sentimon-default-anonymization-key"
DEFAULT_BUCKET_SECONDS = 60
DEFAULT_RETAINED_BUCKETS = 1440
BATCH_SIZE = 256


@dataclass(frozen=True)
class StreamRecord:
    id: str
    text: str
    ts: int | None = None      # unix milliseconds


@dataclass(frozen=True)
class ClassifiedRecord:
    id: str
    label: Label
    scores: tuple[float, ...]
    ts: int
    model_version: str

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "label": self.label.name_lower,
            # -inf (an impossible class under naive Bayes) has no JSON form
            "scores": [s if math.isfinite(s) else None for s in self.scores],
            "ts": self.ts,
            "model_version": self.model_version,
        }


@dataclass(frozen=True)
class DeadLetter:
    reason: str
    raw: str

    def to_json(self) -> dict:
        return {"error": self.reason, "raw": self.raw}


def anonymization_key() -> bytes:
    key = os.environ.get(ANON_KEY_ENV)
    if key:
        return key.encode("utf-8")
    log.warning("%s is not set; hashing record ids with the built-in default key", ANON_KEY_ENV)
    return DEFAULT_ANON_KEY


def hash_id(record_id: str, key: bytes) -> str:
    return hmac.new(key, record_id.encode("utf-8"), hashlib.sha256).hexdigest()[:32]


def anonymize(record: StreamRecord, key: bytes = DEFAULT_ANON_KEY) -> StreamRecord:
    """Replace @mentions with ``@user`` and the id with a keyed HMAC-SHA256."""
    return replace(record, id=hash_id(record.id, key), text=MENTION_PATTERN.sub("@user", record.text))


def parse_record(line: str) -> StreamRecord:
    """Decode one NDJSON line; raises ValueError with a reason on bad input."""
    try:
        obj = json.loads(line)
    except ValueError as exc:
        raise ValueError(f"invalid JSON: {exc}") from None
    return record_from_obj(obj)


def record_from_obj(obj) -> StreamRecord:
    if not isinstance(obj, dict):
        raise ValueError("record is not a JSON object")
    rid, text, ts = obj.get("id"), obj.get("text"), obj.get("ts")
    if not isinstance(rid, str) or not rid:
        raise ValueError("missing or empty 'id'")
    if not isinstance(text, str):
        raise ValueError("missing or non-string 'text'")
    if ts is not None and (isinstance(ts, bool) or not isinstance(ts, int)):
        raise ValueError("'ts' must be integer milliseconds")
    return StreamRecord(rid, text, ts)


def classify_record(record: StreamRecord, bundle, key: bytes | None = DEFAULT_ANON_KEY,
                    now_ms: int | None = None) -> ClassifiedRecord:
    """Anonymize (unless ``key`` is None), preprocess, vectorize and predict."""
    return classify_records([record], bundle, key, now_ms)[0]


def classify_records(records: list[StreamRecord], bundle, key: bytes | None = DEFAULT_ANON_KEY,
                     now_ms: int | None = None) -> list[ClassifiedRecord]:
    if key is not None:
        records = [anonymize(r, key) for r in records]
    if now_ms is None and any(r.ts is None for r in records):
        now_ms = int(time.time() * 1000)
    predictions = bundle.predict_texts([r.text for r in records])
    return [
        ClassifiedRecord(r.id, p.label, p.scores, r.ts if r.ts is not None else now_ms,
                         bundle.model_version)
        for r, p in zip(records, predictions)
    ]


class TrendWindow:
    """Tumbling event-time buckets holding per-label counts.

    The window retains the ``retained_buckets`` buckets ending at the newest
    bucket seen so far. A record that falls before that range, whether it
    arrives late or its bucket ages out later, is counted in
    ``dropped_late`` instead, which makes the final state independent of
    arrival order.
    """

    def __init__(self, bucket_seconds: int = DEFAULT_BUCKET_SECONDS,
                 retained_buckets: int = DEFAULT_RETAINED_BUCKETS):
        if bucket_seconds < 1 or retained_buckets < 1:
            raise ValueError("bucket_seconds and retained_buckets must be >= 1")
        self.bucket_seconds = int(bucket_seconds)
        self.retained_buckets = int(retained_buckets)
        self.counts: dict[int, list[int]] = {}
        self.newest: int | None = None
        self.dropped_late = 0

    @property
    def bucket_ms(self) -> int:
        return self.bucket_seconds * 1000

    def bucket_of(self, ts: int) -> int:
        return ts - ts % self.bucket_ms

    def oldest_retained(self, end: int | None = None) -> int | None:
        end = self.newest if end is None else end
        return None if end is None else end - (self.retained_buckets - 1) * self.bucket_ms

    def add(self, ts: int, label: Label) -> None:
        bucket = self.bucket_of(ts)
        if self.newest is not None and bucket < self.oldest_retained():
            self.dropped_late += 1
            return
        if self.newest is None or bucket > self.newest:
            self.newest = bucket
            self._expire()
        self.counts.setdefault(bucket, [0] * N_CLASSES)[int(label)] += 1

    def _expire(self) -> None:
        floor = self.oldest_retained()
        for bucket in [b for b in self.counts if b < floor]:
            self.dropped_late += sum(self.counts.pop(bucket))

    def total(self) -> int:
        return sum(sum(c) for c in self.counts.values())

    def state(self) -> tuple:
        """Hashable snapshot for equality checks."""
        return (self.newest, self.dropped_late,
                tuple(sorted((b, tuple(c)) for b, c in self.counts.items())))

    def query(self, from_ts: int, to_ts: int, bucket_seconds: int | None = None) -> list[tuple[int, int, int, int]]:
        """``(bucket_start, neg, neu, pos)`` for retained buckets meeting the range.

        Buckets are ascending and zero-filled. ``bucket_seconds`` may ask for a
        coarser series; it must be a multiple of the window's bucket size.
        """
        if from_ts > to_ts:
            raise InvalidRange(f"from ({from_ts}) is after to ({to_ts})")
        end = self.newest if self.newest is not None else self.bucket_of(to_ts)
        first = max(self.bucket_of(from_ts), self.oldest_retained(end))
        last = min(self.bucket_of(to_ts), end)
        series = []
        for b in range(first, last + 1, self.bucket_ms):
            c = self.counts.get(b, (0, 0, 0))
            series.append((b, c[0], c[1], c[2]))
        if bucket_seconds is None or bucket_seconds == self.bucket_seconds:
            return series
        if bucket_seconds < 1 or bucket_seconds % self.bucket_seconds:
            raise InvalidRange(
                f"bucket of {bucket_seconds}s is not a multiple of the window's {self.bucket_seconds}s")
        coarse_ms = bucket_seconds * 1000
        merged: dict[int, list[int]] = {}
        for b, *c in series:
            acc = merged.setdefault(b - b % coarse_ms, [0, 0, 0])
            for k in range(N_CLASSES):
                acc[k] += c[k]
        return [(b, *c) for b, c in sorted(merged.items())]


def update_window(window: TrendWindow, rec: ClassifiedRecord) -> TrendWindow:
    window.add(rec.ts, rec.label)
    return window


def query_trend(window: TrendWindow, from_ts: int, to_ts: int, bucket_seconds: int | None = None):
    return window.query(from_ts, to_ts, bucket_seconds)


class StreamService:
    """Thread-safe ingestion front end around one loaded model bundle."""

    def __init__(self, bundle, *, anonymize: bool = True, key: bytes | None = None,
                 bucket_seconds: int = DEFAULT_BUCKET_SECONDS,
                 retained_buckets: int = DEFAULT_RETAINED_BUCKETS,
                 clock: Callable[[], float] = time.time,
                 dead_letter_sink: Callable[[DeadLetter], None] | None = None,
                 dead_letter_history: int = 100):
        self.bundle = bundle
        self.key = (key or anonymization_key()) if anonymize else None
        self.window = TrendWindow(bucket_seconds, retained_buckets)
        self.clock = clock
        self.started = clock()
        self.ingested = 0
        self.classified = 0
        self.dead_lettered = 0
        self.recent_dead_letters: deque[DeadLetter] = deque(maxlen=dead_letter_history)
        self._sink = dead_letter_sink
        self._lock = threading.Lock()

    @property
    def model_version(self) -> str:
        return self.bundle.model_version

    def _dead(self, letter: DeadLetter) -> DeadLetter:
        with self._lock:
            self.dead_lettered += 1
            self.recent_dead_letters.append(letter)
        if self._sink is not None:
            self._sink(letter)
        return letter

    def _classify(self, records: list[StreamRecord], raws: list[str]) -> list:
        now_ms = int(self.clock() * 1000)
        try:
            results = classify_records(records, self.bundle, self.key, now_ms)
        except Exception:
            if len(records) == 1:
                log.exception("classification failed")
                return [self._dead(DeadLetter("classification failed", raws[0]))]
            # isolate the failing record(s)
            return [out for r, raw in zip(records, raws) for out in self._classify([r], [raw])]
        with self._lock:
            for rec in results:
                self.window.add(rec.ts, rec.label)
            self.classified += len(results)
        return results

    def submit(self, record: StreamRecord, raw: str | None = None) -> ClassifiedRecord | DeadLetter:
        with self._lock:
            self.ingested += 1
        return self._classify([record], [raw if raw is not None else json.dumps(record.__dict__)])[0]

    def ingest_lines(self, lines: Iterable[str], batch_size: int = BATCH_SIZE) -> Iterator[ClassifiedRecord | DeadLetter]:
        """Process NDJSON lines lazily, yielding one outcome per non-blank line, in order."""
        pending: list[tuple[int, StreamRecord | DeadLetter, str]] = []

        def flush():
            valid = [(k, rec, raw) for k, rec, raw in pending if isinstance(rec, StreamRecord)]
            done = dict(zip([k for k, _, _ in valid],
                            self._classify([r for _, r, _ in valid], [raw for _, _, raw in valid])
                            if valid else []))
            for k, rec, _ in pending:
                yield done.get(k, rec)
            pending.clear()

        for k, line in enumerate(lines):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            with self._lock:
                self.ingested += 1
            try:
                pending.append((k, parse_record(line), line))
            except ValueError as exc:
                pending.append((k, self._dead(DeadLetter(str(exc), line)), line))
            if len(pending) >= batch_size:
                yield from flush()
        if pending:
            yield from flush()

    def trend(self, from_ts: int | None = None, to_ts: int | None = None,
              bucket_seconds: int | None = None) -> list[tuple[int, int, int, int]]:
        with self._lock:
            w = self.window
            if to_ts is None:
                to_ts = w.newest + w.bucket_ms - 1 if w.newest is not None else int(self.clock() * 1000)
            if from_ts is None:
                from_ts = w.oldest_retained(w.newest if w.newest is not None else w.bucket_of(to_ts))
            return w.query(from_ts, to_ts, bucket_seconds)

    def health(self) -> dict:
        with self._lock:
            return {
                "model_version": self.model_version,
                "uptime_seconds": max(0.0, self.clock() - self.started),
                "ingested": self.ingested,
                "classified": self.classified,
                "dead_lettered": self.dead_lettered,
                "dropped_late": self.window.dropped_late,
                "retained_total": self.window.total(),
            }
