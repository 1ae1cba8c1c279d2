"""HTTP classification and labeling service.

Endpoints (JSON in/out; errors as {"error": {"code", "message", ...}}):

    POST /v1/events                ingest + classify + triage
    POST /v1/classify              classify without persistence
    GET  /v1/queue?limit=N         pending entries, entropy descending
    GET  /v1/events/{id}/matrix    raw frames + normalized matrix
    POST /v1/queue/{id}/label      submit a manual label
    POST /v1/models/retrain        train a new version (not activated)
    POST /v1/models/{v}/activate   swap the active model
    GET  /v1/models                registry listing
    GET  /v1/health                liveness and counters
"""

from __future__ import annotations

import math
import threading
from pathlib import Path

import numpy as np

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..active_learning import LabelingQueue, TriagePolicy, prediction_entropy, retrain, triage
from ..errors import (
    AlreadyLabeled,
    DuplicateEventId,
    NoActiveModel,
    NoiseNetError,
    NotEnoughNewLabels,
    UnknownEvent,
    UnknownVersion,
)
from ..events import CLASSES, TRIAGE_QUEUED, NoiseEvent, Prediction, band_centers
from ..ingest import Dataset, load_dataset, parse_event
from ..nn.checkpoint import load_checkpoint
from ..nn.network import INFER, Network, forward_arrays
from ..preprocess import interpolate_event, make_event_matrix, normalize
from .config import ServiceConfig
from .store import EventStore, ModelRegistry

_STATUS = {
    "MalformedRecord": 400,
    "SchemaViolation": 400,
    "EventTooShort": 400,
    "DegenerateEvent": 400,
    "InvalidDistribution": 400,
    "DuplicateEventId": 409,
    "AlreadyLabeled": 409,
    "NotEnoughNewLabels": 412,
    "SingleClassTrainingSet": 412,
    "DegenerateDurations": 412,
    "EmptyDataset": 412,
    "UnknownEvent": 404,
    "UnknownVersion": 404,
    "NoActiveModel": 503,
}


def _error_response(exc: NoiseNetError) -> JSONResponse:
    code = type(exc).__name__
    body = {"error": {"code": code, "message": str(exc)}}
    if isinstance(exc, NotEnoughNewLabels):
        body["error"]["details"] = {
            "required": exc.required,
            "have": exc.have,
            "remaining": exc.required - exc.have,
        }
    return JSONResponse(status_code=_STATUS.get(code, 500), content=body)


class ServiceState:
    """Shared mutable state behind the endpoints."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        data_dir = Path(config.data_dir)
        self.store = EventStore(data_dir)
        self.registry = ModelRegistry(data_dir)
        self.policy = TriagePolicy(
            entropy_threshold=config.entropy_threshold,
            queue_capacity=config.queue_capacity,
            retrain_min_new_labels=config.retrain_min_new_labels,
        )
        self.queue = LabelingQueue(self.policy, data_dir / "queue")
        self.base_dataset = (
            load_dataset(config.base_dataset) if config.base_dataset else Dataset.from_events([])
        )
        self.write_lock = threading.Lock()
        self.retrain_lock = threading.Lock()

        if config.initial_model and not self.registry.has_versions():
            net = load_checkpoint(config.initial_model)
            net.version = self.registry.next_version()
            self.registry.register(net, summary={"source": "initial_model"})
            self.registry.activate(net.version)

        # re-attach labels recorded before a restart
        for event_id, record in self.queue.manual_labels().items():
            if event_id in self.store:
                event = self.store.get(event_id)
                self.store.attach_label(event_id, event.with_label(record.as_class_label()))

    def classify(self, event: NoiseEvent, net: Network) -> Prediction:
        matrix = make_event_matrix(event, net.duration_stats, net.config.input_cols)
        probs = forward_arrays(
            net,
            matrix.values[None, None, :, :],
            np.array([matrix.duration_feature]),
            INFER,
        )[0]
        entropy = min(prediction_entropy(probs), math.log(2.0))
        prediction = Prediction(
            probabilities=(float(probs[0]), float(probs[1])),
            entropy=entropy,
            model_version=net.version,
            triage="auto_classified",
        )
        outcome = triage(prediction, self.policy)
        return Prediction(
            probabilities=prediction.probabilities,
            entropy=prediction.entropy,
            model_version=prediction.model_version,
            triage=outcome,
        )


def _prediction_json(p: Prediction) -> dict:
    return {
        "probabilities": list(p.probabilities),
        "classes": list(CLASSES),
        "entropy": p.entropy,
        "model_version": p.model_version,
    }


def create_app(config: ServiceConfig) -> FastAPI:
    state = ServiceState(config)
    app = FastAPI(title="noisenet", docs_url=None, redoc_url=None)
    app.state.service = state

    @app.exception_handler(NoiseNetError)
    async def _handle(request: Request, exc: NoiseNetError):
        return _error_response(exc)

    @app.post("/v1/events")
    async def ingest_event(request: Request):
        body = (await request.body()).decode("utf-8")
        event = parse_event(body)
        net = state.registry.active()
        prediction = state.classify(event, net)
        with state.write_lock:
            state.store.append(event)  # raises DuplicateEventId before any side effect
            if prediction.triage == TRIAGE_QUEUED:
                queued = state.queue.enqueue(event.event_id, prediction)
                if not queued:  # queue full: fall back to auto classification
                    prediction = Prediction(
                        probabilities=prediction.probabilities,
                        entropy=prediction.entropy,
                        model_version=prediction.model_version,
                        triage="auto_classified",
                    )
            if prediction.triage == "auto_classified" and event.label is None:
                state.queue.record_model_label(
                    event.event_id, prediction.predicted_class, net.version
                )
        return {
            "event_id": event.event_id,
            "prediction": _prediction_json(prediction),
            "triage": prediction.triage,
        }

    @app.post("/v1/classify")
    async def classify_only(request: Request):
        body = (await request.body()).decode("utf-8")
        event = parse_event(body)
        net = state.registry.active()
        prediction = state.classify(event, net)
        return {
            "event_id": event.event_id,
            "prediction": _prediction_json(prediction),
            "triage": prediction.triage,
        }

    @app.get("/v1/queue")
    async def get_queue(limit: int = 50):
        entries = state.queue.pending()[: max(limit, 0)]
        return {
            "entries": [
                {
                    "event_id": e.event_id,
                    "probabilities": list(e.probabilities),
                    "entropy": e.entropy,
                    "model_version": e.model_version,
                    "enqueued_at": e.enqueued_at.isoformat(),
                    "status": e.status,
                }
                for e in entries
            ],
            "pending_count": state.queue.pending_count(),
            "new_labels_since_retrain": state.queue.new_labels_since_retrain,
            "retrain_min_new_labels": state.policy.retrain_min_new_labels,
        }

    @app.get("/v1/events/{event_id}/matrix")
    async def event_matrix(event_id: str):
        event = state.store.get(event_id)
        raw = interpolate_event(event, width=_active_width(state))
        duration_feature = None
        try:
            net = state.registry.active()
            duration_feature = net.duration_stats.standardize(len(event.frames))
        except NoActiveModel:
            pass
        return {
            "event_id": event_id,
            "width": raw.shape[1],
            "raw_frames": [list(f.as_row()) for f in event.frames],
            "matrix": normalize(raw).tolist(),
            "raw_matrix": raw.tolist(),
            "duration_seconds": len(event.frames),
            "duration_feature": duration_feature,
            "band_centers_hz": list(band_centers()),
            "label": event.label.class_ if event.label else None,
        }

    @app.post("/v1/queue/{event_id}/label")
    async def submit_label(event_id: str, request: Request):
        body = await request.json()
        class_ = body.get("class")
        labeler = body.get("labeler", "")
        with state.write_lock:
            record = state.queue.submit_label(event_id, class_, labeler)
            event = state.store.get(event_id)
            state.store.attach_label(event_id, event.with_label(record.as_class_label()))
        return record.to_record()

    @app.post("/v1/models/retrain")
    async def retrain_model(request: Request):
        body = {}
        if (await request.body()):
            body = await request.json()
        force = bool(body.get("force", False))
        with state.retrain_lock:
            next_version = state.registry.next_version()
            events_by_id = {e.event_id: e for e in state.store.all_events()}
            net, combined, history = retrain(
                state.queue,
                events_by_id,
                state.base_dataset,
                state.config.retrain,
                next_version,
                force=force,
            )
            summary = {
                "trained_on": len(combined),
                "new_manual_labels": len(state.queue.manual_labels()),
                "final_train_loss": history[-1].train_loss if history else None,
            }
            state.registry.register(net, summary=summary)
        return JSONResponse(
            status_code=202,
            content={"version": net.version, "trained_on": len(combined), "activated": False},
        )

    @app.post("/v1/models/{version}/activate")
    async def activate_model(version: str):
        state.registry.activate(version)
        return state.registry.listing()

    @app.get("/v1/models")
    async def list_models():
        return state.registry.listing()

    @app.get("/v1/health")
    async def health():
        return {
            "status": "ok",
            "active_version": state.registry.active_version,
            "events_stored": len(state.store),
            "queue_pending": state.queue.pending_count(),
            "new_labels_since_retrain": state.queue.new_labels_since_retrain,
            "retrain_min_new_labels": state.policy.retrain_min_new_labels,
        }

    console_dir = config.console_dir
    if console_dir and Path(console_dir).is_dir():
        app.mount("/console", StaticFiles(directory=console_dir, html=True), name="console")

    return app


def _active_width(state: ServiceState) -> int:
    try:
        return state.registry.active().config.input_cols
    except NoActiveModel:
        return 37


def serve(config: ServiceConfig) -> None:
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
