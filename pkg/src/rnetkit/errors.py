"""Exception hierarchy.

Data problems derive from ``DataError`` (CLI exit code 3); exhausted
randomized retries derive from ``RetryError`` (exit code 4).
"""


class RNetError(Exception):
    pass


class DataError(RNetError, ValueError):
    pass


class RetryError(RNetError, RuntimeError):
    pass


class EmptyDataset(DataError):
    pass


class RaggedRows(DataError):
    def __init__(self, row, expected, got):
        super().__init__(f"row {row}: expected {expected} columns, got {got}")
        self.row = row


class NonFiniteValue(DataError):
    def __init__(self, row, col, token=None):
        msg = f"non-finite value at row {row}, column {col}"
        if token is not None:
            msg += f" ({token!r})"
        super().__init__(msg)
        self.row = row
        self.col = col


class BadFormat(DataError):
    pass


class AllPointsIdentical(DataError):
    pass


class NoPositiveDistance(DataError):
    pass


class ScaleExceeded(DataError):
    pass


class InvalidThreshold(DataError):
    pass


class InvalidAlpha(DataError):
    pass


class NonPositiveRadius(DataError):
    pass


class EpsOutOfRange(DataError):
    pass


class KOutOfRange(DataError):
    pass


class CentersTooClose(DataError):
    pass


class InfeasibleFamily(DataError):
    pass


class DeciderInconsistent(RNetError, RuntimeError):
    pass


class TooManyCloseEntries(RNetError, RuntimeError):
    """Raised by net assembly when the indicator matrix flags too many entries."""


class RetriesExhausted(RetryError):
    pass
