"""Exception hierarchy shared by every hydrocast module."""


class HydrocastError(Exception):
    """Base class for all hydrocast errors."""


class ValidationError(HydrocastError, ValueError):
    """Input data violates a structural rule (gaps, ordering, ranges)."""


class ParseError(ValidationError):
    """A CSV or config file could not be parsed.

    Carries the file, the 1-based line number and the offending field so
    that the message points straight at the bad cell.
    """

    def __init__(self, path, line, field, message):
        self.path = str(path)
        self.line = line
        self.field = field
        super().__init__(f"{self.path}:{line}: field {field!r}: {message}")


class DomainError(HydrocastError, ValueError):
    """Argument outside the mathematical or physical domain of an operation."""


class CapacityLookupError(HydrocastError, KeyError):
    """No installed-capacity record exists for a required year."""

    def __init__(self, year):
        self.year = year
        super().__init__(year)

    def __str__(self):
        return f"no installed capacity record for year {self.year}"


class ShapeError(HydrocastError, ValueError):
    """Array dimensions do not agree."""


class DivergenceError(HydrocastError, ArithmeticError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch, loss):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"training diverged at epoch {epoch} (loss={loss})")


class CheckpointError(HydrocastError):
    """Base class for checkpoint read failures."""


class CheckpointParseError(CheckpointError):
    """Checkpoint file is truncated or malformed."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint header names an unsupported format version."""


class CheckpointShapeError(CheckpointError, ShapeError):
    """Checkpoint sections disagree with the declared dimensions."""


class CheckpointValueError(CheckpointError):
    """Checkpoint contains a non-finite entry."""


class PipelineError(HydrocastError):
    """Wraps a failure raised inside one pipeline stage.

    The original exception is chained as ``__cause__``.
    """

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")
