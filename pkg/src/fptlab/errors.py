"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class FptError(Exception):
    """Base class for all package errors."""


class SpecError(FptError, ValueError):
    """Malformed curve/measure specification (bad JSON, unknown kind, missing field)."""


class ParameterError(FptError, ValueError):
    """A numerical parameter violates its precondition (e.g. alpha == 0)."""


class DomainError(FptError, ValueError):
    """An argument lies outside the domain where the object is defined."""


class UnsupportedRegimeError(FptError):
    """The requested evaluation is outside the regime where the method is reliable."""


class ConsistencyError(FptError):
    """A post-condition check on a computed object failed."""


class NumericError(FptError, ArithmeticError):
    """An iterative numerical method failed to reach its tolerance.

    ``achieved`` carries the best error estimate that was reached.
    """

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved
