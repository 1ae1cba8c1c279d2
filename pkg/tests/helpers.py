from datetime import datetime, timezone

import numpy as np

from noisenet.events import ClassLabel, NoiseEvent, SpectralFrame
from noisenet.ingest import Dataset

START = datetime(2017, 6, 1, 12, 0, 0, tzinfo=timezone.utc)


def make_frame(level: float = 60.0, overall: float | None = None) -> SpectralFrame:
    return SpectralFrame(tuple([level] * 36), overall if overall is not None else level + 15.0)


def make_event(
    event_id: str = "ev-1",
    duration: int = 10,
    level: float = 60.0,
    label: str | None = None,
    levels: list | None = None,
    monitor_id: str = "m-01",
    start: datetime = START,
) -> NoiseEvent:
    if levels is None:
        levels = [level] * duration
    frames = tuple(make_frame(lv) for lv in levels)
    class_label = None
    if label is not None:
        class_label = ClassLabel(class_=label, provenance="manual", labeler="test",
                                 labeled_at=start)
    return NoiseEvent(event_id=event_id, monitor_id=monitor_id, start_time=start,
                      frames=frames, label=class_label)


def make_random_event(rng: np.random.Generator, event_id: str, duration: int,
                      label: str | None = None) -> NoiseEvent:
    rows = rng.uniform(30.0, 90.0, size=(duration, 37))
    frames = tuple(SpectralFrame(tuple(r[:36]), float(r[36])) for r in rows)
    class_label = None
    if label is not None:
        class_label = ClassLabel(class_=label, provenance="manual", labeler="test",
                                 labeled_at=START)
    return NoiseEvent(event_id=event_id, monitor_id="m-rand", start_time=START,
                      frames=frames, label=class_label)


def balanced_dataset(rng: np.random.Generator, n_per_class: int,
                     min_dur: int = 5, max_dur: int = 30) -> Dataset:
    events = []
    for i in range(n_per_class):
        for cls in ("aircraft", "community"):
            events.append(
                make_random_event(
                    rng,
                    f"{cls[0]}-{i}",
                    int(rng.integers(min_dur, max_dur + 1)),
                    label=cls,
                )
            )
    return Dataset.from_events(events)
