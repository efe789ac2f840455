"""Exception hierarchy shared by all modules."""


class FrostmanError(Exception):
    """Base class for every error raised by frostman_kit."""


class PreconditionError(FrostmanError, ValueError):
    """An operation was called with inputs violating its documented hypothesis."""


class EmptyInputError(PreconditionError):
    pass


class InvalidRingError(PreconditionError):
    pass


class BudgetError(PreconditionError):
    """The Hausdorff budget ``a`` is not larger than the constructed base cover."""


class ResolutionError(PreconditionError):
    pass


class DivergenceError(PreconditionError):
    """A series or integral required to converge was found to diverge."""


class DiniViolationError(DivergenceError):
    pass


class DegenerateGaugeError(PreconditionError):
    pass


class DisjointnessError(PreconditionError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class AbsoluteContinuityError(PreconditionError):
    pass


class NonIntegrableError(PreconditionError):
    pass


class HypothesisError(FrostmanError):
    """A Frostman-type hypothesis is not satisfied by the given data."""


class BoundViolation(FrostmanError, AssertionError):
    """A bound that the construction guarantees was observed to fail."""
