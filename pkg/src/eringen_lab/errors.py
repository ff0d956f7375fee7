"""Exception types raised by the laboratory."""


class EringenLabError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgument(EringenLabError, ValueError):
    pass


class UnsupportedOperation(EringenLabError, NotImplementedError):
    pass


class SingularEvaluation(EringenLabError, ArithmeticError):
    """A singular kernel was evaluated at zero distance."""


class NotPositiveDefinite(EringenLabError, ArithmeticError):
    """Cholesky met a non-positive pivot."""

    def __init__(self, message, pivot_index=None):
        super().__init__(message)
        self.pivot_index = pivot_index


class NumericFailure(EringenLabError, ArithmeticError):
    pass


class TruncationTooSmall(EringenLabError, ValueError):
    """The full-line truncation length cannot certify the requested tail tolerance."""

    def __init__(self, message, minimal_length):
        super().__init__(message)
        self.minimal_length = minimal_length
