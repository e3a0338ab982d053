"""Exception hierarchy shared by every module."""


class VarianceError(ValueError):
    """Base class for numerical errors raised by varlab."""


class EmptyInput(VarianceError):
    pass


class InsufficientData(VarianceError):
    """Raised when a variance is requested from a single observation."""


class NonFiniteValue(VarianceError):
    pass


class NegativeVariance(VarianceError):
    """A variance below zero reached code that needs a real spread.

    This is the visible symptom of catastrophic cancellation upstream.
    """


class ZeroMean(VarianceError):
    pass


class DomainError(VarianceError):
    pass


class UnsupportedParallelAlgorithm(VarianceError):
    pass
