"""Exception hierarchy for iupsim."""
from typing import Optional


class IupsimError(Exception):
    """Base class for all iupsim errors."""

    exit_code = 1


class ConfigError(IupsimError, ValueError):
    """Raised when a run configuration cannot be parsed or contains unknown keys."""

    exit_code = 3


class ValidationError(IupsimError, ValueError):
    """Raised when a parameter set violates a physical invariant.

    Attributes:
        invariant: Short name of the violated invariant
    """

    exit_code = 4

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class ConvergenceError(IupsimError, RuntimeError):
    """Raised when a numerical procedure does not converge."""

    exit_code = 5

    def __init__(self, message: str, change: Optional[float] = None):
        super().__init__(message)
        self.change = change


class FitError(IupsimError, ValueError):
    """Raised when a fringe fit is ill-posed for the supplied scan."""

    exit_code = 5


class FitConvergenceError(ConvergenceError):
    """Raised when the least-squares fit exhausts its iteration budget."""
