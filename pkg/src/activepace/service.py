"""HTTP annotation service: a human answers the engine's oracle queries.

The engine loop runs on its own thread and blocks at the annotation barrier;
every mutation funnels through the broker's lock, so request handlers never
touch engine state concurrently.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .engine import Engine
from .query import OracleAnswer, OracleUnavailable


@dataclass
class PendingQuery:
    sample_id: str
    kind: str                      # "label" or "verify"
    claimed: Optional[str]
    candidates: list[dict]
    feature_summary: list[float]
    answer: Optional[str] = None
    event: threading.Event = field(default_factory=threading.Event)

    def public(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "kind": self.kind,
            "claimed": self.claimed,
            "candidates": self.candidates,
            "feature_summary": self.feature_summary,
        }


class QueryBroker:
    """Thread-safe pending-query table; queries persist until answered."""

    def __init__(self, timeout: Optional[float] = None):
        self.timeout = timeout
        self._lock = threading.Lock()
        self._pending: dict[str, PendingQuery] = {}
        self.closed = False

    def ask(self, query: PendingQuery) -> str:
        with self._lock:
            if self.closed:
                raise OracleUnavailable("service shut down")
            self._pending[query.sample_id] = query
        if not query.event.wait(self.timeout):
            with self._lock:
                self._pending.pop(query.sample_id, None)
            raise OracleUnavailable(f"no answer for {query.sample_id}")
        with self._lock:
            self._pending.pop(query.sample_id, None)
        return query.answer  # type: ignore[return-value]

    def pending(self) -> list[dict]:
        with self._lock:
            return [q.public() for q in self._pending.values()]

    def answer(self, sample_id: str, category: str) -> bool:
        with self._lock:
            query = self._pending.get(sample_id)
            if query is None or query.answer is not None:
                return False
            query.answer = category
        query.event.set()
        return True

    def close(self) -> None:
        with self._lock:
            self.closed = True
            pending = list(self._pending.values())
        for q in pending:
            q.answer = q.answer or "unknown"
            q.event.set()


class HumanOracle:
    """Oracle backed by the broker; each call blocks until a human answers."""

    def __init__(self, broker: QueryBroker, engine_ref: "EngineRunner"):
        self.broker = broker
        self.runner = engine_ref

    def _card(self, sample_id: str, kind: str, claimed: Optional[str]) -> PendingQuery:
        engine = self.runner.engine
        i = engine.store.sample_ids.index(sample_id)
        scores = engine.bank.scores(engine.store.features[i : i + 1])[0]
        candidates = [
            {"name": name, "score": float(scores[j])}
            for j, name in enumerate(engine.store.category_names)
        ]
        summary = [float(x) for x in engine.store.features[i][:8]]
        return PendingQuery(sample_id=sample_id, kind=kind, claimed=claimed,
                            candidates=candidates, feature_summary=summary)

    def label(self, sample_id: str) -> OracleAnswer:
        category = self.broker.ask(self._card(sample_id, "label", None))
        return OracleAnswer(sample_id=sample_id, category=category)

    def verify(self, sample_id: str, claimed: str) -> OracleAnswer:
        category = self.broker.ask(self._card(sample_id, "verify", claimed))
        return OracleAnswer(sample_id=sample_id, category=category, is_correction=True)


class EngineRunner:
    """Drives the engine loop on a worker thread for the service."""

    def __init__(self, engine: Engine, broker: QueryBroker, iterations: Optional[int] = None):
        self.engine = engine
        self.broker = broker
        self.iterations = iterations if iterations is not None else engine.config.max_iters
        self.thread: Optional[threading.Thread] = None
        self.error: Optional[BaseException] = None
        self.extra_categories: list[str] = []

    def start(self) -> None:
        self.thread = threading.Thread(target=self._loop, daemon=True)
        self.thread.start()

    def _loop(self) -> None:
        try:
            for _ in range(self.iterations):
                if self.broker.closed:
                    break
                self.engine.run_iteration()
        except OracleUnavailable:
            pass
        except BaseException as exc:  # surfaced via /api/status
            self.error = exc

    def join(self, timeout: Optional[float] = None) -> None:
        if self.thread is not None:
            self.thread.join(timeout)

    def status(self) -> dict:
        engine = self.engine
        return {
            "iteration": engine.bank.t,
            "categories": list(engine.store.category_names),
            "annotated": int(np.sum(engine.labels.annotated_mask())),
            "pseudo": int(np.sum(engine.labels.provenance == 1)),
            "pending": len(self.broker.pending()),
            "accuracy": engine.ledger.records[-1].rank1 if engine.ledger.records else None,
            "error": repr(self.error) if self.error else None,
        }


class LabelBody(BaseModel):
    sample_id: str
    category: str


class CategoryBody(BaseModel):
    name: str


def create_app(runner: EngineRunner) -> FastAPI:
    app = FastAPI(title="annotation console backend")
    broker = runner.broker

    @app.get("/api/status")
    def status() -> dict:
        return runner.status()

    @app.get("/api/queries")
    def queries() -> list[dict]:
        return broker.pending()

    @app.post("/api/labels")
    def post_label(body: LabelBody):
        known = runner.engine.store.category_names + runner.extra_categories
        valid = (body.category == "unknown" or body.category.startswith("new:")
                 or body.category in known)
        if not valid:
            return JSONResponse(status_code=422, content={"error": f"unknown category {body.category!r}"})
        if not broker.answer(body.sample_id, body.category):
            return JSONResponse(status_code=409, content={"error": f"no pending query for {body.sample_id!r}"})
        return {"ok": True}

    @app.post("/api/categories")
    def post_category(body: CategoryBody):
        if not body.name:
            return JSONResponse(status_code=422, content={"error": "empty category name"})
        if body.name not in runner.extra_categories:
            runner.extra_categories.append(body.name)
        return {"ok": True, "name": body.name}

    @app.get("/api/metrics")
    def metrics() -> list[dict]:
        return [r.as_dict() for r in runner.engine.ledger.records]

    return app


def serve_annotation_api(engine: Engine, bind: str, iterations: Optional[int] = None,
                         timeout: Optional[float] = None):
    """Wire a human oracle into the engine and serve the API on ``bind``."""
    import uvicorn

    broker = QueryBroker(timeout=timeout)
    engine.oracle = HumanOracle(broker, None)  # type: ignore[arg-type]
    runner = EngineRunner(engine, broker, iterations)
    engine.oracle.runner = runner
    app = create_app(runner)
    runner.start()
    host, _, port = bind.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))
