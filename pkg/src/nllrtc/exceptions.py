"""Exception types raised across the package."""


class NLLRTCError(Exception):
    """Base class for all package errors."""


class ShapeError(NLLRTCError, ValueError):
    """Array dimensions are inconsistent with what an operation expects."""


class InvalidModeError(ShapeError):
    """Requested tensor mode is outside ``[0, order)``."""


class CongruenceError(ShapeError):
    """A mask does not have the same shape as the data it describes."""


class DegenerateGroupError(NLLRTCError):
    """No candidate patch besides the target has a defined similarity."""


class DetectionUndefinedError(NLLRTCError):
    """Correlation-driven cloud detection cannot be evaluated."""


class UncompletedRegionError(NLLRTCError):
    """Missing entries remain after every fallback was exhausted."""

    def __init__(self, message, coordinates=()):
        super().__init__(message)
        self.coordinates = list(coordinates)


class NumericError(NLLRTCError, ArithmeticError):
    """Non-finite values were produced or supplied to a solver."""


class FormatError(NLLRTCError, ValueError):
    """A container or configuration file is malformed."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class EmptyObservationError(NLLRTCError, ValueError):
    """A completion problem has no observed entry to anchor it."""
