"""Exception hierarchy shared by all modules.

The CLI maps :class:`DataError` to exit code 2 and :class:`NumericalError`
to exit code 3.
"""


class WeekaheadError(Exception):
    """Base class for errors raised by this package."""


class DataError(WeekaheadError, ValueError):
    """Malformed, missing or inconsistent input data."""


class InsufficientHistoryError(DataError):
    """Not enough aligned weeks before the target week."""


class NumericalError(WeekaheadError, ArithmeticError):
    """A factorization or solve failed.

    ``minor`` is the 1-based index of the leading minor that was not
    positive definite, when known.
    """

    def __init__(self, message, minor=None):
        super().__init__(message)
        self.minor = minor
