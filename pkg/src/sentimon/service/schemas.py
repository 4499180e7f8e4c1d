"""Request and response models for the HTTP API."""
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, StrictInt


class ClassifyRequest(BaseModel):
    model_config = ConfigDict(extra="ignore")

    id: str = Field(min_length=1)
    text: str
    ts: Optional[StrictInt] = None


class ClassifiedRecordOut(BaseModel):
    id: str
    label: str
    scores: List[Optional[float]]
    ts: int
    model_version: str


class DeadLetterOut(BaseModel):
    error: str
    raw: str


class IngestResponse(BaseModel):
    classified: List[ClassifiedRecordOut]
    dead_letters: List[DeadLetterOut]


class TrendPoint(BaseModel):
    bucket_start: int
    negative: int
    neutral: int
    positive: int


class TrendResponse(BaseModel):
    bucket_seconds: int
    series: List[TrendPoint]


class HealthResponse(BaseModel):
    model_version: str
    uptime_seconds: float
    ingested: int
    classified: int
    dead_lettered: int
    dropped_late: int
    retained_total: int
