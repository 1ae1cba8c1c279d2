"""Dataset parsing, persistence, and event detection from level streams.

The canonical on-disk format is JSON lines, one event per line:

    {"event_id": "...", "monitor_id": "...",
     "start_time": "2017-06-01T12:00:00Z",
     "frames": [[f0, ..., f35, overall], ...],
     "label": "aircraft" | "community" | null}

Detection follows the monitoring rule: a candidate opens at the first
sample strictly above 65 dBA, extends while samples stay at or above
63 dBA, and is kept only if it lasts at least 8 seconds.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import (
    DuplicateEventId,
    InsufficientClassCount,
    MalformedRecord,
    SchemaViolation,
)
from .events import CLASSES, NUM_ROWS, ClassLabel, NoiseEvent, SpectralFrame

ONSET_DB = 65.0
SUSTAIN_DB = 63.0
MIN_EVENT_SECONDS = 8

# Imported ground-truth labels carry this labeler sentinel and the event's
# start time, so parse -> serialize -> parse is the identity.
IMPORT_LABELER = "import"


def _parse_timestamp(text: str, line_no: int | None = None) -> datetime:
    try:
        ts = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except (ValueError, TypeError, AttributeError):
        raise SchemaViolation(f"bad timestamp {text!r}", line_no=line_no, field="start_time")
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_event(text: str, line_no: int | None = None) -> NoiseEvent:
    """Parse one JSON-lines record into a validated NoiseEvent.

    Raises MalformedRecord on syntax errors and SchemaViolation on wrong
    channel counts, non-finite values, or fewer than two frames.
    """
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"invalid JSON: {exc}", line_no=line_no) from exc
    if not isinstance(record, dict):
        raise SchemaViolation("record must be a JSON object", line_no=line_no)

    for key in ("event_id", "monitor_id", "start_time", "frames"):
        if key not in record:
            raise SchemaViolation(f"missing field '{key}'", line_no=line_no, field=key)
    if not isinstance(record["frames"], list) or not record["frames"]:
        raise SchemaViolation("frames must be a non-empty array", line_no=line_no, field="frames")
    if len(record["frames"]) < 2:
        raise SchemaViolation(
            f"event needs at least 2 frames, got {len(record['frames'])}",
            line_no=line_no,
            field="frames",
        )

    frames = []
    for i, row in enumerate(record["frames"]):
        if not isinstance(row, list) or len(row) != NUM_ROWS:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise SchemaViolation(
                f"frame {i} must have {NUM_ROWS} values, got {got}",
                line_no=line_no,
                field=f"frames[{i}]",
            )
        values = []
        for j, v in enumerate(row):
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                raise SchemaViolation(
                    f"frame {i} value {j} is not a finite number: {v!r}",
                    line_no=line_no,
                    field=f"frames[{i}][{j}]",
                )
            values.append(float(v))
        try:
            frames.append(SpectralFrame(tuple(values[:-1]), values[-1]))
        except SchemaViolation as exc:
            raise SchemaViolation(str(exc), line_no=line_no, field=f"frames[{i}]") from exc

    start_time = _parse_timestamp(record["start_time"], line_no)
    label = None
    raw_label = record.get("label")
    if raw_label is not None:
        if raw_label not in CLASSES:
            raise SchemaViolation(f"unknown label {raw_label!r}", line_no=line_no, field="label")
        label = ClassLabel(
            class_=raw_label, provenance="manual", labeler=IMPORT_LABELER, labeled_at=start_time
        )

    try:
        return NoiseEvent(
            event_id=str(record["event_id"]),
            monitor_id=str(record["monitor_id"]),
            start_time=start_time,
            frames=tuple(frames),
            label=label,
        )
    except SchemaViolation as exc:
        raise SchemaViolation(str(exc), line_no=line_no) from exc


def serialize_event(event: NoiseEvent) -> str:
    """One JSON line in the canonical wire format (no trailing newline)."""
    record = {
        "event_id": event.event_id,
        "monitor_id": event.monitor_id,
        "start_time": _format_timestamp(event.start_time),
        "frames": [list(f.as_row()) for f in event.frames],
        "label": event.label.class_ if event.label is not None else None,
    }
    return json.dumps(record, separators=(",", ":"))


@dataclass(frozen=True)
class Dataset:
    """A collection of events with per-class counts of labeled events."""

    events: tuple[NoiseEvent, ...]
    class_counts: dict[str, int]

    @staticmethod
    def from_events(events) -> "Dataset":
        events = tuple(events)
        seen = set()
        for e in events:
            if e.event_id in seen:
                raise DuplicateEventId(f"duplicate event_id {e.event_id!r}")
            seen.add(e.event_id)
        counts = Counter(e.label.class_ for e in events if e.label is not None)
        return Dataset(events, {c: counts.get(c, 0) for c in CLASSES})

    def __len__(self) -> int:
        return len(self.events)

    def labeled(self) -> tuple[NoiseEvent, ...]:
        return tuple(e for e in self.events if e.label is not None)


def load_dataset(path) -> Dataset:
    """Load a JSONL event file, rejecting duplicates and bad records."""
    events = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            event = parse_event(line, line_no=line_no)
            if event.event_id in seen:
                raise DuplicateEventId(
                    f"line {line_no}: duplicate event_id {event.event_id!r}"
                )
            seen.add(event.event_id)
            events.append(event)
    return Dataset.from_events(events)


def save_dataset(dataset: Dataset, path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for event in dataset.events:
            fh.write(serialize_event(event) + "\n")


def sample_balanced(dataset: Dataset, n_per_class: int, seed: int) -> Dataset:
    """Draw n_per_class labeled events per class without replacement.

    Deterministic for a given seed; the combined draw is shuffled so the
    result is not grouped by class.
    """
    by_class = {c: [e for e in dataset.events if e.label and e.label.class_ == c] for c in CLASSES}
    for c, events in by_class.items():
        if len(events) < n_per_class:
            raise InsufficientClassCount(
                f"class {c!r} has {len(events)} labeled events, need {n_per_class}"
            )
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    chosen = []
    for c in CLASSES:
        events = by_class[c]
        idx = rng.permutation(len(events))[:n_per_class]
        chosen.extend(events[i] for i in idx)
    order = rng.permutation(len(chosen))
    return Dataset.from_events([chosen[i] for i in order])


@dataclass(frozen=True)
class LevelStream:
    """A continuous 1 Hz sequence of (timestamp, overall dBA) samples."""

    timestamps: tuple[datetime, ...]
    levels: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.timestamps) != len(self.levels):
            raise SchemaViolation("timestamps and levels must have equal length")
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        for i in range(1, len(self.timestamps)):
            delta = (self.timestamps[i] - self.timestamps[i - 1]).total_seconds()
            if delta != 1.0:
                raise SchemaViolation(
                    f"samples {i - 1}->{i} are {delta}s apart, expected exactly 1s"
                )

    def __len__(self) -> int:
        return len(self.levels)


def detect_events(stream: LevelStream) -> list[tuple[int, int]]:
    """Find event windows as half-open (start, end) sample index pairs.

    A candidate opens at the first sample strictly above ONSET_DB, extends
    while samples stay >= SUSTAIN_DB (the opening sample included), closes
    before the first sample < SUSTAIN_DB or at stream end, and is emitted
    only when it spans at least MIN_EVENT_SECONDS samples.
    """
    levels = stream.levels
    n = len(levels)
    out = []
    i = 0
    while i < n:
        if levels[i] > ONSET_DB:
            j = i
            while j < n and levels[j] >= SUSTAIN_DB:
                j += 1
            if j - i >= MIN_EVENT_SECONDS:
                out.append((i, j))
            i = j + 1
        else:
            i += 1
    return out
