"""
Exception hierarchy for the SIS analyzer.

Every class carries the process exit code the command-line runner reports
when the exception escapes a command.
"""
from typing import Any, Optional

from config.constants import ExitCode


class SISError(Exception):
    """Base class for all analyzer errors."""
    exit_code: ExitCode = ExitCode.INPUT_ERROR

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "message": str(self), "exit_code": int(self.exit_code)}


class InputError(SISError):
    """Malformed input: non-square or negative matrix, non-finite value, bad file."""
    exit_code = ExitCode.INPUT_ERROR


class DimensionError(InputError):
    """Vector or matrix length does not match the feature count."""


class ModelValidationError(InputError):
    """A model failed validate_assumptions."""

    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report


class DomainError(SISError):
    """Set is not admissible for the requested operation."""
    exit_code = ExitCode.INPUT_ERROR


class PreconditionError(SISError):
    """Operation called outside its mathematical precondition."""
    exit_code = ExitCode.INPUT_ERROR


class ResourceCapError(SISError):
    """Enumeration would exceed a configured cap."""
    exit_code = ExitCode.RESOURCE_CAP


class ConvergenceError(SISError):
    """Iterative method did not converge."""
    exit_code = ExitCode.CONVERGENCE_FAILURE

    def __init__(
        self,
        message: str,
        best_estimate: Optional[Any] = None,
        residual: Optional[float] = None,
    ):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.residual = residual

    def to_dict(self) -> dict:
        out = super().to_dict()
        out["residual"] = self.residual
        if isinstance(self.best_estimate, float):
            out["best_estimate"] = self.best_estimate
        return out


class ConsistencyError(SISError):
    """A computed object failed a structural post-check."""
    exit_code = ExitCode.CONVERGENCE_FAILURE


class MonotonicityError(ConsistencyError):
    """Semi-flow from the top state increased beyond the allowed slack."""

    def __init__(self, message: str, time: Optional[float] = None, index: Optional[int] = None):
        super().__init__(message)
        self.time = time
        self.index = index
