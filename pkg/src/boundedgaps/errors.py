"""Exception types shared across the package."""


class PreconditionError(ValueError):
    """An argument violates the documented precondition of an operation."""


class CertificationError(ArithmeticError):
    """Interval arithmetic could not certify a required inequality or sign."""


class BudgetExceededError(CertificationError):
    """A construction ran out of its digit or precision budget.

    ``achieved`` carries how far the construction got before stopping.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class MalformedInputError(ValueError):
    """An input file could not be parsed into the expected structure."""


class VerificationError(AssertionError):
    """A construction failed one of its own built-in correctness checks."""
