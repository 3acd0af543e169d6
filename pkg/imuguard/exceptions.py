from __future__ import annotations


class ImuGuardError(Exception):
    """Base class for all errors raised by imuguard."""

    exit_code = 4


class ValidationError(ImuGuardError, ValueError):
    """Invalid user input: configuration, flags or inconsistent modes."""

    exit_code = 2


class ConfigurationError(ValidationError):
    """A configuration value is out of range or inconsistent with another."""


class DataError(ImuGuardError, ValueError):
    """The data itself cannot be processed."""

    exit_code = 3


class InvalidRotationError(DataError):
    """A quaternion that should be unit-norm is not."""


class ShapeError(DataError):
    """Arrays have incompatible dimensions."""


class OrderingError(DataError):
    """Timestamps are not strictly increasing."""


class GapError(DataError):
    """Consecutive samples are further apart than the configured maximum gap."""


class EmptyInputError(DataError):
    """An operation received an empty stream, series or trajectory."""


class InsufficientDataError(DataError):
    """Not enough clean data to build or calibrate a template library."""


class NoOverlapError(DataError):
    """Two trajectories share no timestamps within the association tolerance."""


class RankDeficiencyError(DataError):
    """Alignment geometry is degenerate (too few or collinear points)."""


class CorruptedReportError(DataError):
    """A detection report does not match the stream or template library."""


class ResamplingError(DataError):
    """A requested rate cannot be produced from the available samples."""


class StageError(ImuGuardError):
    """A pipeline stage failed; the cause is chained."""

    def __init__(self, stage: str, cause: BaseException) -> None:
        super().__init__(f"Stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", ImuGuardError.exit_code)
