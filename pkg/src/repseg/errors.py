"""Exception hierarchy shared across the package.

DataError subclasses map to CLI exit code 3, NumericError subclasses to
exit code 4; anything else is a bug.
"""


class RepSegError(Exception):
    """Base class for all package errors."""


class DataError(RepSegError):
    """Invalid or inconsistent input data."""


class NumericError(RepSegError):
    """Numerical failure during optimization or evaluation."""


class MalformedHeader(DataError):
    pass


class MalformedRow(DataError):
    pass


class InconsistentJointCount(DataError):
    pass


class EmptySequence(DataError):
    pass


class OverlappingSegments(DataError):
    pass


class OutOfRangeSegment(DataError):
    pass


class DegenerateScale(DataError):
    pass


class LengthMismatch(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class HeadMismatch(DataError):
    pass


class TooFewSamples(DataError):
    pass


class EmptyInput(DataError):
    pass


class EmptyGroup(DataError):
    pass


class NoMatchedPairs(DataError):
    pass


class BadConfig(DataError):
    """Configuration value or key is invalid."""


class CheckpointError(DataError):
    pass


class NonFiniteGradient(NumericError):
    pass
