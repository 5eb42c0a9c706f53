"""Exception types raised across the package."""


class LogBMError(Exception):
    """Base class for all package errors."""


class InvalidBody(LogBMError):
    pass


class UnboundedBody(InvalidBody):
    pass


class UnboundedResult(LogBMError):
    pass


class DegenerateBody(InvalidBody):
    pass


class SingularInput(LogBMError):
    pass


class DimensionMismatch(LogBMError):
    pass


class DimensionTooHigh(LogBMError):
    """Exact routine requested above the supported dimension (n <= 3)."""


class WeightSumError(LogBMError):
    pass


class NotUnconditional(LogBMError):
    pass


class ZeroHits(LogBMError):
    pass


class EmptyMeasure(LogBMError):
    pass


class EmptyIntersection(LogBMError):
    pass


class LatticeMismatch(LogBMError):
    pass


class MixedSweep(LogBMError):
    pass


class InputError(LogBMError):
    """Malformed input file or failed validation; carries a field/line hint."""

    def __init__(self, message, where=None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)
