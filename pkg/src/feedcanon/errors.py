"""Exception hierarchy shared by the library and the command-line front end."""


class FeedcanonError(Exception):
    """Base class for all errors raised by feedcanon."""


class PreconditionError(FeedcanonError, ValueError):
    """An argument violates a mathematical precondition of the operation."""


class FieldError(PreconditionError):
    """Wrong scalar field for the operation (exact vs float)."""


class ShapeError(PreconditionError):
    """Matrix sizes are inconsistent."""


class SingularMatrixError(PreconditionError):
    """A matrix that must be invertible is singular."""


class BudgetError(PreconditionError):
    """A perturbation exceeds the allowance of the perturbation schedule."""


class InvariantViolation(FeedcanonError, AssertionError):
    """An internal consistency check failed. Always a bug."""


class FormatError(FeedcanonError, ValueError):
    """Input text or JSON does not follow the documented schema."""
