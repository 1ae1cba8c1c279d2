"""Core domain types: spectral frames, noise events, labels, and predictions.

All types are immutable value objects after construction and safe to share
between threads. One frame is one second of monitoring data: 36 third-octave
band levels plus the overall A-weighted level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .errors import SchemaViolation

NUM_BANDS = 36
NUM_ROWS = 37  # 36 bands plus the overall-LAeq row
CLASSES = ("aircraft", "community")
PROVENANCES = ("manual", "model")
TRIAGE_AUTO = "auto_classified"
TRIAGE_QUEUED = "queued_for_labeling"

LEVEL_MIN_DB = -10.0
LEVEL_MAX_DB = 140.0

# Nominal third-octave band centers. The series is fixed by its endpoints
# (6.3 Hz and 20 kHz) and its length.
_BAND_CENTERS_HZ = (
    6.3, 8.0, 10.0, 12.5, 16.0, 20.0, 25.0, 31.5, 40.0, 50.0, 63.0, 80.0,
    100.0, 125.0, 160.0, 200.0, 250.0, 315.0, 400.0, 500.0, 630.0, 800.0,
    1000.0, 1250.0, 1600.0, 2000.0, 2500.0, 3150.0, 4000.0, 5000.0, 6300.0,
    8000.0, 10000.0, 12500.0, 16000.0, 20000.0,
)


def band_centers() -> tuple[float, ...]:
    """Nominal center frequencies (Hz) of the 36 bands, ascending."""
    return _BAND_CENTERS_HZ


def _check_level(value: float, what: str) -> None:
    if not math.isfinite(value):
        raise SchemaViolation(f"{what} is not finite: {value!r}", field=what)
    if not (LEVEL_MIN_DB <= value <= LEVEL_MAX_DB):
        raise SchemaViolation(
            f"{what} outside plausible range [{LEVEL_MIN_DB}, {LEVEL_MAX_DB}]: {value!r}",
            field=what,
        )


@dataclass(frozen=True)
class SpectralFrame:
    """One second of levels: 36 band LAeq values plus the overall LAeq, in dB."""

    band_levels: tuple[float, ...]
    overall_laeq: float

    def __post_init__(self) -> None:
        if len(self.band_levels) != NUM_BANDS:
            raise SchemaViolation(
                f"expected {NUM_BANDS} band levels, got {len(self.band_levels)}",
                field="band_levels",
            )
        object.__setattr__(self, "band_levels", tuple(float(v) for v in self.band_levels))
        object.__setattr__(self, "overall_laeq", float(self.overall_laeq))
        for i, v in enumerate(self.band_levels):
            _check_level(v, f"band_levels[{i}]")
        _check_level(self.overall_laeq, "overall_laeq")

    def as_row(self) -> tuple[float, ...]:
        """All 37 values, bands first, overall LAeq last."""
        return self.band_levels + (self.overall_laeq,)


@dataclass(frozen=True)
class ClassLabel:
    """A class assignment with its provenance.

    Manual labels must name the labeler; model labels come from a
    checkpoint version recorded in ``labeler``.
    """

    class_: str
    provenance: str
    labeled_at: datetime
    labeler: str | None = None

    def __post_init__(self) -> None:
        if self.class_ not in CLASSES:
            raise SchemaViolation(f"unknown class {self.class_!r}", field="class")
        if self.provenance not in PROVENANCES:
            raise SchemaViolation(f"unknown provenance {self.provenance!r}", field="provenance")
        if self.provenance == "manual" and not self.labeler:
            raise SchemaViolation("manual labels must name a labeler", field="labeler")
        if self.labeled_at.tzinfo is None:
            object.__setattr__(self, "labeled_at", self.labeled_at.replace(tzinfo=timezone.utc))


@dataclass(frozen=True)
class NoiseEvent:
    """A stored event: an ordered 1 Hz sequence of spectral frames.

    Duration in seconds equals the frame count. At least two frames are
    required so a time axis exists to interpolate over.
    """

    event_id: str
    monitor_id: str
    start_time: datetime
    frames: tuple[SpectralFrame, ...]
    label: ClassLabel | None = None

    def __post_init__(self) -> None:
        if not self.event_id:
            raise SchemaViolation("event_id must be non-empty", field="event_id")
        object.__setattr__(self, "frames", tuple(self.frames))
        if len(self.frames) < 2:
            raise SchemaViolation(
                f"event needs at least 2 frames, got {len(self.frames)}", field="frames"
            )
        if self.start_time.tzinfo is None:
            object.__setattr__(self, "start_time", self.start_time.replace(tzinfo=timezone.utc))

    def rows(self) -> np.ndarray:
        """Event as a float64 array of shape (37, T): band rows then overall."""
        arr = np.array([f.as_row() for f in self.frames], dtype=np.float64).T
        arr.flags.writeable = False
        return arr

    def with_label(self, label: ClassLabel | None) -> "NoiseEvent":
        return NoiseEvent(self.event_id, self.monitor_id, self.start_time, self.frames, label)


def duration_seconds(event: NoiseEvent) -> int:
    """Event duration in seconds; frames are sampled at 1 Hz."""
    return len(event.frames)


@dataclass(frozen=True)
class Prediction:
    """Model output for one event: class probabilities and their entropy."""

    probabilities: tuple[float, float]
    entropy: float
    model_version: str
    triage: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "probabilities", tuple(float(p) for p in self.probabilities))
        if len(self.probabilities) != len(CLASSES):
            raise SchemaViolation("prediction needs one probability per class")
        if any(p < 0.0 or p > 1.0 for p in self.probabilities):
            raise SchemaViolation("probabilities must lie in [0, 1]")
        if abs(sum(self.probabilities) - 1.0) > 1e-9:
            raise SchemaViolation("probabilities must sum to 1")
        if not (-1e-12 <= self.entropy <= math.log(2.0) + 1e-12):
            raise SchemaViolation("binary entropy must lie in [0, ln 2]")
        if self.triage not in (TRIAGE_AUTO, TRIAGE_QUEUED):
            raise SchemaViolation(f"unknown triage outcome {self.triage!r}")

    @property
    def predicted_class(self) -> str:
        # argmax with ties toward the first class
        return CLASSES[0] if self.probabilities[0] >= self.probabilities[1] else CLASSES[1]


@dataclass(frozen=True, eq=False)
class EventMatrix:
    """Fixed-size CNN input: a normalized 37-row matrix plus a duration scalar.

    Rows 0..35 are the bands ascending in frequency; row 36 is the overall
    LAeq. Cells are dimensionless (zero mean, unit population std over the
    whole matrix); ``duration_feature`` is the standardized event duration.
    """

    values: np.ndarray
    duration_feature: float
    source_event_id: str

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != NUM_ROWS or arr.shape[1] < 1:
            raise SchemaViolation(f"matrix must be {NUM_ROWS}xW, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise SchemaViolation("matrix contains non-finite values")
        if abs(float(arr.mean())) > 1e-9:
            raise SchemaViolation("matrix mean is not 0")
        if abs(float(arr.std()) - 1.0) > 1e-9:
            raise SchemaViolation("matrix population std is not 1")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "duration_feature", float(self.duration_feature))

    @property
    def width(self) -> int:
        return self.values.shape[1]
