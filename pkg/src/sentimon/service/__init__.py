"""Real-time classification service and trend aggregation."""
from .stream import (
    ClassifiedRecord,
    DeadLetter,
    StreamRecord,
    StreamService,
    TrendWindow,
    anonymize,
    classify_record,
    query_trend,
    update_window,
)

__all__ = [
    "ClassifiedRecord", "DeadLetter", "StreamRecord", "StreamService", "TrendWindow",
    "anonymize", "classify_record", "query_trend", "update_window",
]
