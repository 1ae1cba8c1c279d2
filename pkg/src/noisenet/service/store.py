"""Append-only file-backed persistence for events and models.

Layout under ``data_dir``:

    events.jsonl            accepted events, wire format, one per line
    labels.jsonl            label log (owned by the labeling queue)
    queue/                  queue log and snapshots
    registry.jsonl          model register/activate log
    models/<version>/       checkpoint.bin and report.json per version

Every append is flushed before the write is acknowledged, so a killed
process loses nothing it confirmed. Startup replays the logs.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from ..errors import (
    DuplicateEventId,
    NoActiveModel,
    UnknownEvent,
    UnknownVersion,
    VersionUnsupported,
)
from ..events import NoiseEvent
from ..ingest import parse_event, serialize_event
from ..jsonlog import append_record, replay_lines
from ..nn.checkpoint import load_checkpoint, save_checkpoint
from ..nn.network import Network


class EventStore:
    """Durable event log with an in-memory id index."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._path = self.data_dir / "events.jsonl"
        self._events: dict[str, NoiseEvent] = {}
        self._lock = threading.Lock()
        if self._path.exists():
            for line_no, line in replay_lines(self._path):
                event = parse_event(line, line_no=line_no)
                self._events[event.event_id] = event

    def __len__(self) -> int:
        return len(self._events)

    def __contains__(self, event_id: str) -> bool:
        return event_id in self._events

    def get(self, event_id: str) -> NoiseEvent:
        event = self._events.get(event_id)
        if event is None:
            raise UnknownEvent(f"no stored event {event_id!r}")
        return event

    def all_events(self) -> list[NoiseEvent]:
        return list(self._events.values())

    def append(self, event: NoiseEvent) -> None:
        """Persist a new event; flushed before returning."""
        with self._lock:
            if event.event_id in self._events:
                raise DuplicateEventId(f"event {event.event_id!r} already stored")
            with open(self._path, "a", encoding="utf-8") as fh:
                fh.write(serialize_event(event) + "\n")
                fh.flush()
            self._events[event.event_id] = event

    def attach_label(self, event_id: str, event: NoiseEvent) -> None:
        """Replace the in-memory view of an event (label attached).

        The durable record of labels is the label log; the events log
        stays append-only.
        """
        with self._lock:
            self._events[event_id] = event


@dataclass(frozen=True)
class ModelVersion:
    version: str
    checkpoint_path: str
    created_at: str
    summary: dict


class ModelRegistry:
    """Versioned checkpoints with an atomically swapped active model."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.models_dir = self.data_dir / "models"
        self.models_dir.mkdir(parents=True, exist_ok=True)
        self._log = self.data_dir / "registry.jsonl"
        self._lock = threading.RLock()
        self._versions: dict[str, ModelVersion] = {}
        self._order: list[str] = []
        self._active_version: str | None = None
        self._active_net: Network | None = None
        self._replay()

    def _replay(self) -> None:
        if not self._log.exists():
            return
        for _, line in replay_lines(self._log):
            record = json.loads(line)
            if record["action"] == "register":
                mv = ModelVersion(
                    version=record["version"],
                    checkpoint_path=record["checkpoint_path"],
                    created_at=record["created_at"],
                    summary=record.get("summary", {}),
                )
                self._versions[mv.version] = mv
                self._order.append(mv.version)
            elif record["action"] == "activate":
                self._active_version = record["version"]
        if self._active_version is not None:
            mv = self._versions.get(self._active_version)
            if mv is not None and Path(mv.checkpoint_path).exists():
                self._active_net = load_checkpoint(mv.checkpoint_path)

    def _append_log(self, record: dict) -> None:
        append_record(self._log, record)

    def next_version(self) -> str:
        with self._lock:
            numbers = [int(v[1:]) for v in self._versions if v.startswith("v") and v[1:].isdigit()]
            return f"v{max(numbers, default=0) + 1}"

    def register(self, net: Network, summary: dict | None = None) -> ModelVersion:
        """Persist a checkpoint under its version; does not activate it."""
        with self._lock:
            version = net.version
            if version in self._versions:
                raise VersionUnsupported(f"version {version!r} already registered")
            vdir = self.models_dir / version
            vdir.mkdir(parents=True, exist_ok=True)
            checkpoint_path = vdir / "checkpoint.bin"
            save_checkpoint(net, None, checkpoint_path)
            summary = summary or {}
            (vdir / "report.json").write_text(
                json.dumps(summary, indent=2) + "\n", encoding="utf-8"
            )
            mv = ModelVersion(
                version=version,
                checkpoint_path=str(checkpoint_path),
                created_at=datetime.now(timezone.utc).isoformat(),
                summary=summary,
            )
            self._append_log(
                {
                    "action": "register",
                    "version": mv.version,
                    "checkpoint_path": mv.checkpoint_path,
                    "created_at": mv.created_at,
                    "summary": mv.summary,
                }
            )
            self._versions[version] = mv
            self._order.append(version)
            return mv

    def activate(self, version: str) -> None:
        """Load the checkpoint and swap it in; in-flight requests finish
        on the model they already hold."""
        with self._lock:
            mv = self._versions.get(version)
            if mv is None:
                raise UnknownVersion(f"no registered model version {version!r}")
            net = load_checkpoint(mv.checkpoint_path)
            self._append_log({"action": "activate", "version": version})
            self._active_net = net
            self._active_version = version

    def active(self) -> Network:
        net = self._active_net
        if net is None:
            raise NoActiveModel("no active model version")
        return net

    @property
    def active_version(self) -> str | None:
        return self._active_version

    def listing(self) -> dict:
        with self._lock:
            return {
                "active_version": self._active_version,
                "versions": [
                    {
                        "version": v,
                        "created_at": self._versions[v].created_at,
                        "summary": self._versions[v].summary,
                    }
                    for v in self._order
                ],
            }

    def has_versions(self) -> bool:
        return bool(self._versions)
