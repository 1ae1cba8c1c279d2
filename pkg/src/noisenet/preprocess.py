"""Fixed-size matrix construction: interpolation, normalization, duration.

Each variable-length event is resampled per row with linear interpolation
onto ``width`` uniformly spaced positions, then the whole matrix is shifted
and scaled to zero mean and unit population standard deviation. Duration is
kept as a separate feature, standardized against training-set statistics.
Normalization is per event, so inference needs no shipped dataset
statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDurations, DegenerateEvent, EventTooShort, SchemaViolation
from .events import EventMatrix, NoiseEvent, duration_seconds

DEFAULT_WIDTH = 37
_STD_FLOOR = 1e-9


@dataclass(frozen=True)
class DurationStats:
    """Population mean/std of event durations over a training set."""

    mean: float
    std: float
    computed_over: int

    def __post_init__(self) -> None:
        if not self.std > 0:
            raise DegenerateDurations("duration std must be positive")

    def standardize(self, seconds: float) -> float:
        return (seconds - self.mean) / self.std


def interpolate_rows(rows: np.ndarray, width: int) -> np.ndarray:
    """Linearly resample each row of (R, T) onto width uniform positions.

    Sample positions are p_j = j*(T-1)/(width-1); the first and last output
    columns equal the input's first and last columns exactly.
    """
    rows = np.asarray(rows, dtype=np.float64)
    n_rows, t = rows.shape
    if t < 2:
        raise EventTooShort(f"need at least 2 samples per row, got {t}")
    if width < 2:
        raise SchemaViolation(f"width must be >= 2, got {width}")
    if t == width:
        return rows.copy()
    positions = np.arange(width, dtype=np.float64) * (t - 1) / (width - 1)
    left = np.minimum(positions.astype(np.int64), t - 2)
    frac = positions - left
    out = rows[:, left] * (1.0 - frac) + rows[:, left + 1] * frac
    # exact endpoints regardless of rounding in the position arithmetic
    out[:, 0] = rows[:, 0]
    out[:, -1] = rows[:, -1]
    return out


def interpolate_event(event: NoiseEvent, width: int = DEFAULT_WIDTH) -> np.ndarray:
    """Resample an event's 37 rows (raw dB) onto a fixed number of columns."""
    return interpolate_rows(event.rows(), width)


def normalize(matrix: np.ndarray) -> np.ndarray:
    """Shift/scale a matrix to zero mean and unit population std, cellwise."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if not np.isfinite(matrix).all():
        raise SchemaViolation("matrix contains non-finite values")
    mean = matrix.mean()
    std = matrix.std()
    if std < _STD_FLOOR:
        raise DegenerateEvent(f"matrix is constant (std={std!r}); cannot normalize")
    return (matrix - mean) / std


def fit_duration_stats(training_events) -> DurationStats:
    """Population mean/std of duration over training events."""
    durations = np.array([duration_seconds(e) for e in training_events], dtype=np.float64)
    if durations.size < 2:
        raise DegenerateDurations("need at least 2 training events")
    mean = float(durations.mean())
    std = float(durations.std())
    if std < _STD_FLOOR:
        raise DegenerateDurations("all training durations are equal")
    return DurationStats(mean=mean, std=std, computed_over=int(durations.size))


def make_event_matrix(
    event: NoiseEvent, stats: DurationStats, width: int = DEFAULT_WIDTH
) -> EventMatrix:
    """Interpolate, normalize, and attach the standardized duration."""
    values = normalize(interpolate_event(event, width))
    return EventMatrix(
        values=values,
        duration_feature=stats.standardize(duration_seconds(event)),
        source_event_id=event.event_id,
    )
