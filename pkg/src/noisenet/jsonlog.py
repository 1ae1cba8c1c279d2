"""Append-only JSONL log helpers shared by the queue and the event store."""

from __future__ import annotations

import json
from pathlib import Path


def append_record(path: Path, record: dict) -> None:
    """Append one JSON line and flush before returning, so an acknowledged
    write survives the process being killed."""
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, separators=(",", ":")) + "\n")
        fh.flush()


def replay_lines(path: Path):
    """Yield (line_no, line) from an append-only log.

    A truncated final line is the footprint of a crash mid-write; that
    write was never acknowledged, so it is dropped. Any other malformed
    line still reaches the caller's parser and fails loudly there.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    truncated_tail = None
    if lines and lines[-1] == "":
        lines.pop()  # complete log: trailing newline
    elif lines:
        truncated_tail = lines.pop()
    for line_no, line in enumerate(lines, start=1):
        if line.strip():
            yield line_no, line
    if truncated_tail is not None and truncated_tail.strip():
        try:
            json.loads(truncated_tail)
        except json.JSONDecodeError:
            return
        yield len(lines) + 1, truncated_tail
