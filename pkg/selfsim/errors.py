"""Exception hierarchy; each class carries the CLI exit code it maps to."""

from typing import Optional


class SelfSimError(Exception):
    """Base class for all toolkit errors."""

    exit_code: int = 1


class IFSValidationError(SelfSimError):
    """The system (or its description file) violates an IFS invariant."""

    exit_code = 2


class InvalidWordError(SelfSimError):
    """A word uses a letter outside 1..N."""

    exit_code = 2


class IncompatibleSystemsError(SelfSimError):
    """Two systems differ in map count, dimension or ambient box."""

    exit_code = 2


class DomainError(SelfSimError):
    """An argument lies outside the mathematical domain (e.g. ratio not in (0,1))."""

    exit_code = 2


class ParameterError(SelfSimError):
    """A tuning parameter is out of range (tolerance <= 0, bad mode...)."""

    exit_code = 2


class BudgetExceededError(SelfSimError):
    """A requested enumeration is larger than the configured budget."""

    exit_code = 2


class SSCUncertifiedError(SelfSimError):
    """The strong separation condition could not be certified."""

    exit_code = 3

    def __init__(self, message: str, lower: float, upper: float):
        super().__init__(message)
        self.lower = lower
        self.upper = upper


class PrecisionError(SelfSimError):
    """A computation stopped before reaching the requested precision."""

    exit_code = 4

    def __init__(self, message: str, lo: float, hi: float, result: Optional[object] = None):
        super().__init__(message)
        self.lo = lo
        self.hi = hi
        self.result = result


class EmptySummaryError(SelfSimError):
    """No certified records were available to summarize."""

    exit_code = 4


class PreconditionError(SelfSimError):
    """A required hypothesis could not be certified, so the check is not applied."""

    exit_code = 5


class InvariantViolation(SelfSimError):
    """A checked invariant failed."""

    exit_code = 5
