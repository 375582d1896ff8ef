"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class AbelError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(AbelError, ValueError):
    """Problem parameters violate a stated invariant."""


class DomainError(AbelError, ValueError):
    """An argument lies outside the set where the operation is defined."""


class NonIntegrableError(DomainError):
    """An endpoint exponent is at or below -1."""


class UnsupportedOrderError(DomainError):
    """A fractional order lies outside the supported range."""


class DegenerateCoefficientsError(AbelError, ValueError):
    """Both coefficients of a dominant singular equation vanish."""


class RegularityViolation(AbelError):
    """A computed density lost the integrable endpoint structure."""


class AccuracyError(AbelError):
    """Adaptive quadrature failed to reach the requested tolerance.

    The best available estimate is kept in :attr:`estimate`.
    """

    def __init__(self, message: str, estimate: float, error: float) -> None:
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class IllPosedDiscretization(AbelError):
    """A collocation matrix is numerically singular."""

    def __init__(self, message: str, condition: float) -> None:
        super().__init__(message)
        self.condition = condition


class StageError(AbelError):
    """Wraps an error raised inside one stage of the solve pipeline."""

    def __init__(self, stage: str, cause: Exception) -> None:
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


class ConsistencyError(AbelError, RuntimeError):
    """An internal consistency check failed; this signals a numerical bug."""
