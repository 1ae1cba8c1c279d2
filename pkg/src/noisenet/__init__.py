"""Aircraft-noise event classification.

Spectral-matrix preprocessing, a from-scratch convolutional network with
training and cross-validation, entropy-driven active learning, and an HTTP
labeling service.
"""

from .events import (
    CLASSES,
    ClassLabel,
    EventMatrix,
    NoiseEvent,
    Prediction,
    SpectralFrame,
    band_centers,
    duration_seconds,
)
from .ingest import (
    Dataset,
    LevelStream,
    detect_events,
    load_dataset,
    parse_event,
    sample_balanced,
    save_dataset,
    serialize_event,
)
from .preprocess import (
    DurationStats,
    fit_duration_stats,
    interpolate_event,
    make_event_matrix,
    normalize,
)

__version__ = "0.1.0"

__all__ = [
    "CLASSES",
    "ClassLabel",
    "EventMatrix",
    "NoiseEvent",
    "Prediction",
    "SpectralFrame",
    "band_centers",
    "duration_seconds",
    "Dataset",
    "LevelStream",
    "detect_events",
    "load_dataset",
    "parse_event",
    "sample_balanced",
    "save_dataset",
    "serialize_event",
    "DurationStats",
    "fit_duration_stats",
    "interpolate_event",
    "make_event_matrix",
    "normalize",
    "__version__",
]
