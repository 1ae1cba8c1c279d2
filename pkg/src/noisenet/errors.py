"""Exception hierarchy shared by every pipeline stage.

``DataError`` subclasses indicate problems with input data (bad records,
degenerate statistics, guard violations) and map to CLI exit code 2 and
HTTP 4xx responses. Everything else is an operational or programming
failure.
"""


class NoiseNetError(Exception):
    """Base class for all errors raised by this package."""


class DataError(NoiseNetError):
    """Invalid or unusable input data."""


class MalformedRecord(DataError):
    """A record could not be parsed at all (bad JSON syntax)."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class SchemaViolation(DataError):
    """A record parsed but does not satisfy the event schema."""

    def __init__(self, message: str, line_no: int | None = None, field: str | None = None):
        self.line_no = line_no
        self.field = field
        context = []
        if line_no is not None:
            context.append(f"line {line_no}")
        if field is not None:
            context.append(f"field '{field}'")
        if context:
            message = f"{', '.join(context)}: {message}"
        super().__init__(message)


class DuplicateEventId(DataError):
    pass


class InsufficientClassCount(DataError):
    pass


class EventTooShort(DataError):
    """Fewer than two frames; interpolation needs at least two samples."""


class DegenerateEvent(DataError):
    """Constant spectral matrix; normalization would divide by zero."""


class DegenerateDurations(DataError):
    """All training durations equal; standardization would divide by zero."""


class EmptyDataset(DataError):
    pass


class SingleClassTrainingSet(DataError):
    pass


class DatasetTooSmall(DataError):
    pass


class UnlabeledEvent(DataError):
    pass


class InvalidDistribution(DataError):
    """Probabilities are negative or do not sum to one."""


class ShapeMismatch(NoiseNetError):
    """Tensor arguments do not conform to the operation's shape contract."""


class StateMismatch(NoiseNetError):
    """Backward called without a matching cached forward pass."""


class BatchTooSmall(NoiseNetError):
    """Batch normalization in train mode needs a batch of at least two."""


class CorruptCheckpoint(NoiseNetError):
    """Checkpoint file is truncated, has a bad magic, or fails its checksum."""


class VersionUnsupported(NoiseNetError):
    """Checkpoint format version is not understood by this build."""


class UnknownEvent(NoiseNetError):
    pass


class UnknownVersion(NoiseNetError):
    pass


class AlreadyLabeled(NoiseNetError):
    pass


class NotEnoughNewLabels(NoiseNetError):
    def __init__(self, required: int, have: int):
        self.required = required
        self.have = have
        super().__init__(
            f"retrain requires {required} new manual labels, have {have} "
            f"({required - have} more needed)"
        )


class NoActiveModel(NoiseNetError):
    pass
