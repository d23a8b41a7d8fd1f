"""Exception hierarchy shared by every module.

Each class carries a short machine-readable ``code`` and the process exit
status the command line maps it to.
"""


class RectDimError(Exception):
    code = "error"
    exit_status = 1


class ValidationError(RectDimError, ValueError):
    """Inputs violate a documented precondition."""

    code = "validation"
    exit_status = 2


class InvalidProfileError(ValidationError):
    code = "invalid_profile"


class EmptyCandidatesError(ValidationError):
    code = "empty_candidates"


class VerificationError(RectDimError):
    """A computed quantity failed an internal consistency check."""

    code = "verification"
    exit_status = 3


class BudgetExceededError(RectDimError):
    """Enumeration or memory budget would be exceeded."""

    code = "budget_exceeded"
    exit_status = 4
