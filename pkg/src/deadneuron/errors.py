"""Exception types shared across the package."""


class DeadNeuronError(Exception):
    """Base class for all package errors."""


class SingularError(DeadNeuronError):
    """A square system is rank deficient within tolerance."""


class DimensionMismatch(DeadNeuronError, ValueError):
    pass


class NumericalInstability(DeadNeuronError):
    """The LP kernel lost consistency in floating point; retry with ``exact=True``."""


class NotGeneric(DeadNeuronError):
    pass


class SizeLimitExceeded(DeadNeuronError):
    pass


class NoneBounded(DeadNeuronError):
    """The arrangement has no bounded region."""


class UndefinedIntercepts(DeadNeuronError):
    """A hyperplane misses some coordinate axis or passes through the origin."""


class DegenerateRow(DeadNeuronError):
    pass


class WrongWidth(DeadNeuronError, ValueError):
    pass


class OutOfTheoremRange(DeadNeuronError, ValueError):
    pass


class CountOverflow(DeadNeuronError, OverflowError):
    """A count does not fit a signed 64-bit integer."""


class MarginalVerdict(DeadNeuronError):
    """The stability margin is within tolerance of zero.

    The partially filled verdict is available as ``verdict``.
    """

    def __init__(self, verdict):
        super().__init__(f"marginal verdict (margin={verdict.margin!r})")
        self.verdict = verdict
