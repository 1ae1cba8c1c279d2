"""Entropy-driven triage, the labeling queue, and retraining.

Predictions whose softmax entropy is strictly above the policy threshold
are queued for a human; everything else is auto-classified. Manual labels
accumulate in an append-only JSONL log; once enough new labels arrive the
model is retrained from scratch on the base set plus the new labels.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import (
    AlreadyLabeled,
    InvalidDistribution,
    NotEnoughNewLabels,
    SchemaViolation,
    UnknownEvent,
)
from .events import CLASSES, TRIAGE_AUTO, TRIAGE_QUEUED, ClassLabel, NoiseEvent, Prediction
from .ingest import Dataset
from .jsonlog import append_record, replay_lines
from .training import TrainConfig, train

LN2 = math.log(2.0)


def prediction_entropy(probs) -> float:
    """Shannon entropy in nats, -sum p ln p with 0 ln 0 = 0."""
    total = 0.0
    h = 0.0
    for p in probs:
        p = float(p)
        if p < 0.0:
            raise InvalidDistribution(f"negative probability {p}")
        total += p
        if p > 0.0:
            h -= p * math.log(p)
    if abs(total - 1.0) > 1e-6:
        raise InvalidDistribution(f"probabilities sum to {total}, not 1")
    return max(h, 0.0)


@dataclass(frozen=True)
class TriagePolicy:
    entropy_threshold: float = 0.45
    queue_capacity: int = 10_000
    retrain_min_new_labels: int = 50

    def __post_init__(self) -> None:
        if not (0.0 <= self.entropy_threshold <= LN2):
            raise SchemaViolation(
                f"entropy threshold must lie in [0, ln 2], got {self.entropy_threshold}"
            )
        if self.queue_capacity < 1:
            raise SchemaViolation("queue capacity must be positive")


def triage(prediction: Prediction, policy: TriagePolicy) -> str:
    """Queue iff entropy strictly exceeds the threshold; ties auto-classify."""
    if prediction.entropy > policy.entropy_threshold:
        return TRIAGE_QUEUED
    return TRIAGE_AUTO


@dataclass
class QueueEntry:
    event_id: str
    probabilities: tuple[float, float]
    entropy: float
    model_version: str
    enqueued_at: datetime
    status: str = "pending"  # pending | labeled | skipped

    def to_record(self) -> dict:
        return {
            "event_id": self.event_id,
            "probabilities": list(self.probabilities),
            "entropy": self.entropy,
            "model_version": self.model_version,
            "enqueued_at": self.enqueued_at.strftime("%Y-%m-%dT%H:%M:%S.%fZ"),
        }

    @staticmethod
    def from_record(record: dict) -> "QueueEntry":
        return QueueEntry(
            event_id=record["event_id"],
            probabilities=tuple(record["probabilities"]),
            entropy=float(record["entropy"]),
            model_version=record["model_version"],
            enqueued_at=datetime.fromisoformat(
                record["enqueued_at"].replace("Z", "+00:00")
            ),
        )


@dataclass(frozen=True)
class LabelRecord:
    """One line of the append-only label log."""

    event_id: str
    class_: str
    provenance: str
    labeled_at: datetime
    labeler: str | None = None

    def to_record(self) -> dict:
        return {
            "event_id": self.event_id,
            "class": self.class_,
            "provenance": self.provenance,
            "labeler": self.labeler,
            "labeled_at": self.labeled_at.strftime("%Y-%m-%dT%H:%M:%S.%fZ"),
        }

    @staticmethod
    def from_record(record: dict) -> "LabelRecord":
        return LabelRecord(
            event_id=record["event_id"],
            class_=record["class"],
            provenance=record["provenance"],
            labeler=record.get("labeler"),
            labeled_at=datetime.fromisoformat(record["labeled_at"].replace("Z", "+00:00")),
        )

    def as_class_label(self) -> ClassLabel:
        return ClassLabel(
            class_=self.class_,
            provenance=self.provenance,
            labeler=self.labeler,
            labeled_at=self.labeled_at,
        )


RETRAIN_MARKER = "__retrain__"


class LabelingQueue:
    """Pending-label queue plus the append-only label log.

    With a directory the queue survives restarts: enqueues append to
    ``queue.jsonl``, labels and retrain markers to ``labels.jsonl``, and
    ``load`` replays both. Snapshots are a read optimization only.
    """

    def __init__(self, policy: TriagePolicy, directory: str | Path | None = None):
        self.policy = policy
        self.entries: dict[str, QueueEntry] = {}
        self.labels: list[LabelRecord] = []
        self._labels_since_retrain = 0
        self._dir = Path(directory) if directory is not None else None
        if self._dir is not None:
            self._dir.mkdir(parents=True, exist_ok=True)
            self._replay()

    @property
    def _queue_log(self) -> Path:
        return self._dir / "queue.jsonl"

    @property
    def _label_log(self) -> Path:
        return self._dir / "labels.jsonl"

    def _append(self, which: str, record: dict) -> None:
        if self._dir is None:
            return
        append_record(self._queue_log if which == "queue" else self._label_log, record)

    def _replay(self) -> None:
        if self._queue_log.exists():
            for _, line in replay_lines(self._queue_log):
                entry = QueueEntry.from_record(json.loads(line))
                self.entries[entry.event_id] = entry
        if self._label_log.exists():
            for _, line in replay_lines(self._label_log):
                record = json.loads(line)
                if record.get("type") == RETRAIN_MARKER:
                    self._labels_since_retrain = 0
                    continue
                label = LabelRecord.from_record(record)
                self.labels.append(label)
                if label.provenance == "manual":
                    self._labels_since_retrain += 1
                    entry = self.entries.get(label.event_id)
                    if entry is not None:
                        entry.status = "labeled"

    def pending(self) -> list[QueueEntry]:
        """Pending entries, highest entropy first, ties by enqueue time."""
        items = [e for e in self.entries.values() if e.status == "pending"]
        return sorted(items, key=lambda e: (-e.entropy, e.enqueued_at, e.event_id))

    def pending_count(self) -> int:
        return sum(1 for e in self.entries.values() if e.status == "pending")

    @property
    def new_labels_since_retrain(self) -> int:
        return self._labels_since_retrain

    def enqueue(self, event_id: str, prediction: Prediction, now: datetime | None = None) -> bool:
        """Add an uncertain event; returns False if the queue is full or
        the event is already queued."""
        if prediction.entropy <= self.policy.entropy_threshold:
            raise SchemaViolation(
                f"entropy {prediction.entropy} does not exceed the triage "
                f"threshold {self.policy.entropy_threshold}"
            )
        if event_id in self.entries:
            return False
        if self.pending_count() >= self.policy.queue_capacity:
            return False
        entry = QueueEntry(
            event_id=event_id,
            probabilities=prediction.probabilities,
            entropy=prediction.entropy,
            model_version=prediction.model_version,
            enqueued_at=now or datetime.now(timezone.utc),
        )
        self.entries[event_id] = entry
        self._append("queue", entry.to_record())
        return True

    def record_model_label(self, event_id: str, class_: str, model_version: str,
                           now: datetime | None = None) -> LabelRecord:
        """Log an auto-classification with model provenance."""
        record = LabelRecord(
            event_id=event_id,
            class_=class_,
            provenance="model",
            labeler=model_version,
            labeled_at=now or datetime.now(timezone.utc),
        )
        self.labels.append(record)
        self._append("label", record.to_record())
        return record

    def submit_label(self, event_id: str, class_: str, labeler: str,
                     now: datetime | None = None) -> LabelRecord:
        """Attach a manual label to a pending entry."""
        entry = self.entries.get(event_id)
        if entry is None:
            raise UnknownEvent(f"event {event_id!r} is not in the labeling queue")
        if entry.status == "labeled":
            raise AlreadyLabeled(f"event {event_id!r} already labeled")
        if class_ not in CLASSES:
            raise SchemaViolation(f"unknown class {class_!r}", field="class")
        if not labeler:
            raise SchemaViolation("labeler must be non-empty", field="labeler")
        record = LabelRecord(
            event_id=event_id,
            class_=class_,
            provenance="manual",
            labeler=labeler,
            labeled_at=now or datetime.now(timezone.utc),
        )
        entry.status = "labeled"
        self.labels.append(record)
        self._labels_since_retrain += 1
        self._append("label", record.to_record())
        return record

    def mark_skipped(self, event_id: str) -> None:
        entry = self.entries.get(event_id)
        if entry is None:
            raise UnknownEvent(f"event {event_id!r} is not in the labeling queue")
        if entry.status == "labeled":
            raise AlreadyLabeled(f"event {event_id!r} already labeled")
        entry.status = "skipped"

    def manual_labels(self) -> dict[str, LabelRecord]:
        """Latest manual label per event (replaying the log in order)."""
        out: dict[str, LabelRecord] = {}
        for record in self.labels:
            if record.provenance == "manual":
                out[record.event_id] = record
        return out

    def mark_retrained(self) -> None:
        self._labels_since_retrain = 0
        self._append("label", {"type": RETRAIN_MARKER,
                                "at": datetime.now(timezone.utc).isoformat()})

    def write_snapshot(self) -> Path | None:
        if self._dir is None:
            return None
        path = self._dir / "snapshot.jsonl"
        tmp = path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            for entry in self.entries.values():
                record = entry.to_record()
                record["status"] = entry.status
                fh.write(json.dumps(record, separators=(",", ":")) + "\n")
        tmp.replace(path)
        return path


def retrain(
    queue: LabelingQueue,
    events_by_id: dict[str, NoiseEvent],
    base_dataset: Dataset,
    config: TrainConfig,
    next_version: str,
    force: bool = False,
):
    """Train a fresh network on the base set plus newly labeled events.

    ``events_by_id`` resolves queued event ids to stored events. Requires
    ``retrain_min_new_labels`` new manual labels unless forced. The new
    network is returned, not activated.
    """
    new_count = queue.new_labels_since_retrain
    if not force and new_count < queue.policy.retrain_min_new_labels:
        raise NotEnoughNewLabels(queue.policy.retrain_min_new_labels, new_count)

    base_ids = {e.event_id for e in base_dataset.events}
    extra: list[NoiseEvent] = []
    for event_id, record in queue.manual_labels().items():
        if event_id in base_ids:
            continue
        event = events_by_id.get(event_id)
        if event is None:
            continue
        extra.append(event.with_label(record.as_class_label()))
    combined = Dataset.from_events(list(base_dataset.events) + extra)

    # derive a fresh seed from the version so retrains differ
    version_number = int("".join(ch for ch in next_version if ch.isdigit()) or 0)
    run_seed = int(
        np.random.SeedSequence([config.seed, 0xBEEF, version_number]).generate_state(1)[0]
    )
    run_config = TrainConfig(
        batch_size=config.batch_size,
        steps=config.steps,
        seed=run_seed,
        eval_every=config.eval_every,
        width=config.width,
        network=config.network,
    )
    net, history = train(combined, Dataset.from_events([]), run_config)
    net.version = next_version
    queue.mark_retrained()
    return net, combined, history
