"""Exception taxonomy shared across the package."""


class SalienceError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SalienceError, ValueError):
    """An input violates a documented invariant (range, shape, dtype)."""


class DimensionMismatchError(ValidationError):
    """Two rasters that must share dimensions do not."""


class StackNestingError(ValidationError):
    """A slice stack is not nested (slice i+1 exceeds slice i somewhere)."""


class NoInstancesError(ValidationError):
    """An instance map contains no salient objects."""


class UndefinedCorrelationError(SalienceError):
    """Rank correlation is undefined (fewer than 2 items or zero variance)."""


class IdMismatchError(ValidationError):
    """Two rank vectors do not cover the same instance ids."""


class DegenerateGroundTruthError(SalienceError):
    """Ground truth is all-positive or all-negative; rates are undefined."""


class UndefinedApError(SalienceError):
    """Average precision is undefined (no positive examples)."""


class TrainingDivergedError(SalienceError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, value: float):
        super().__init__(f"non-finite loss {value!r} at epoch {epoch}")
        self.epoch = epoch
        self.value = value


class DataError(SalienceError):
    """A dataset file is missing, unreadable, or inconsistent."""
