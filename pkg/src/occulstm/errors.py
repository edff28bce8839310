"""Exception hierarchy shared by every occulstm module.

Each exception carries the process exit code the command line reports for it:
2 for usage errors, 3 for data or precondition errors, 4 for numerical failures.
"""


class OcculstmError(Exception):
    """Base class for all errors raised by occulstm."""

    exit_code = 1


class UsageError(OcculstmError):
    """Invalid flags, config file entries, or malformed user-supplied plot input."""

    exit_code = 2


class DataError(OcculstmError):
    """Input data violates a precondition of the requested operation."""

    exit_code = 3


class MalformedRow(DataError):
    """A CSV row has the wrong column count or an unparsable value."""

    def __init__(self, line: int, reason: str) -> None:
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class NonMonotonicTimestamp(DataError):
    """Timestamps within one file must strictly increase."""

    def __init__(self, line: int, previous: int, current: int) -> None:
        super().__init__(f"line {line}: timestamp {current} does not follow {previous}")
        self.line = line


class MissingLabel(DataError):
    """A labeled parse met a row without a people count."""

    def __init__(self, line: int) -> None:
        super().__init__(f"line {line}: people count is required for labeled input")
        self.line = line


class InsufficientDays(DataError):
    """Fewer calendar days than the requested train/val/test split."""

    def __init__(self, required: int, available: int) -> None:
        super().__init__(f"split needs {required} distinct days, data has {available}")
        self.required = required
        self.available = available


class EmptyInput(DataError):
    """An operation that needs at least one element received none."""


class EmptyDataset(DataError):
    """Windowing produced no samples for a stage that needs them."""


class LengthMismatch(DataError):
    """Paired sequences have different lengths."""


class ConfigMismatch(DataError):
    """Flags disagree with the configuration recorded in a checkpoint."""


class ShapeError(OcculstmError):
    """Array shapes are inconsistent with each other."""

    exit_code = 3


class DimensionMismatch(ShapeError):
    """An input does not match the dimensions of the model parameters."""


class ShapeMismatch(ShapeError):
    """Gradient and parameter sets do not line up."""


class CacheMismatch(ShapeError):
    """A forward cache does not belong to the inputs handed to backward."""


class CheckpointFormatError(ShapeError):
    """A checkpoint file is not a valid OCCULSTM container."""


class NumericalError(OcculstmError):
    """A computation produced or received non-finite values."""

    exit_code = 4


class NonFiniteInput(NumericalError):
    """An input vector contains NaN or infinity."""


class DivergedLoss(NumericalError):
    """Training loss became non-finite."""

    def __init__(self, epoch: int) -> None:
        super().__init__(f"loss diverged at epoch {epoch}")
        self.epoch = epoch
