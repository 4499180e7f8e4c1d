"""FastAPI application exposing a :class:`StreamService`."""
from __future__ import annotations

import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException, Query, Request

from ..errors import InvalidRange
from .schemas import (
    ClassifiedRecordOut,
    ClassifyRequest,
    DeadLetterOut,
    HealthResponse,
    IngestResponse,
    TrendPoint,
    TrendResponse,
)
from .stream import DeadLetter, StreamRecord, StreamService

log = logging.getLogger(__name__)


def create_app(service: StreamService) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app):
        yield
        log.info("shutting down; counters: %s", service.health())

    app = FastAPI(title="sentimon", version=service.model_version, lifespan=lifespan)
    app.state.service = service

    @app.post("/classify", response_model=ClassifiedRecordOut)
    def classify(req: ClassifyRequest):
        out = service.submit(StreamRecord(req.id, req.text, req.ts), req.model_dump_json())
        if isinstance(out, DeadLetter):
            raise HTTPException(status_code=422, detail=out.reason)
        return out.to_json()

    @app.post("/ingest", response_model=IngestResponse)
    async def ingest(request: Request):
        """Classify an NDJSON body, one record per line."""
        body = (await request.body()).decode("utf-8", errors="replace")
        classified, dead = [], []
        for out in service.ingest_lines(body.splitlines()):
            (dead if isinstance(out, DeadLetter) else classified).append(out.to_json())
        return {"classified": classified, "dead_letters": dead}

    @app.get("/trend", response_model=TrendResponse)
    def trend(
        from_ts: int | None = Query(None, alias="from"),
        to_ts: int | None = Query(None, alias="to"),
        bucket: int | None = Query(None, description="bucket width in seconds"),
    ):
        try:
            series = service.trend(from_ts, to_ts, bucket)
        except InvalidRange as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        width = bucket or service.window.bucket_seconds
        return TrendResponse(
            bucket_seconds=width,
            series=[TrendPoint(bucket_start=b, negative=n, neutral=u, positive=p) for b, n, u, p in series],
        )

    @app.get("/health", response_model=HealthResponse)
    def health():
        return service.health()

    @app.get("/dead-letters", response_model=list[DeadLetterOut])
    def dead_letters():
        return [d.to_json() for d in list(service.recent_dead_letters)]

    return app
