"""
Error types and error handling helpers for the THz UAV delay optimizer
"""

import functools
import threading
import traceback
from datetime import datetime
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Type

from utils.logging_config import log_error, log_warning

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_BAD_INPUT = 2


class OptimizerError(Exception):
    """Base exception class for optimizer-specific errors."""

    def __init__(
        self,
        message: str,
        error_code: str = "GENERAL_ERROR",
        details: Optional[str] = None,
    ):
        self.message = message
        self.error_code = error_code
        self.details = details
        self.timestamp = datetime.now()
        super().__init__(self.message)


class ValidationError(OptimizerError):
    """Invalid inputs: nonpositive budgets, dimension mismatch, bad sweep spec."""

    def __init__(self, message: str, details: Optional[str] = None):
        super().__init__(message, "VALIDATION_ERROR", details)


class DomainError(OptimizerError):
    """Argument outside the mathematical domain of a formula."""

    def __init__(self, message: str, details: Optional[str] = None):
        super().__init__(message, "DOMAIN_ERROR", details)


class ScenarioFormatError(OptimizerError):
    """Scenario JSON that cannot be parsed."""

    def __init__(self, message: str, details: Optional[str] = None):
        super().__init__(message, "SCENARIO_FORMAT_ERROR", details)


class EnergyInfeasible(OptimizerError):
    """No positive allocation meets the uplink energy budget of some users."""

    def __init__(
        self,
        message: str,
        users: Sequence[int] = (),
        details: Optional[str] = None,
    ):
        self.users = [int(n) for n in users]
        if self.users and details is None:
            details = f"users: {self.users}"
        super().__init__(message, "ENERGY_INFEASIBLE", details)


class InfeasibleInit(OptimizerError):
    """Start point of the alternating loop violates the constraints."""

    def __init__(self, message: str, details: Optional[str] = None):
        super().__init__(message, "INFEASIBLE_INIT", details)


class LineSearchStall(OptimizerError):
    """Backtracking found no descent step above the minimum step length."""

    def __init__(self, message: str, details: Optional[str] = None):
        super().__init__(message, "LINE_SEARCH_STALL", details)


INFEASIBLE_CODES = ("ENERGY_INFEASIBLE", "INFEASIBLE_INIT")


def exit_code_for(error: OptimizerError) -> int:
    """CLI exit code for an optimizer error."""
    if error.error_code in INFEASIBLE_CODES:
        return EXIT_INFEASIBLE
    return EXIT_BAD_INPUT


def handle_errors(
    log_error_details: bool = True,
    fallback_value: Any = None,
    error_message: Optional[str] = None,
):
    """Decorator for CLI entry points.

    Optimizer errors are logged and turned into the matching exit code;
    when ``fallback_value`` is given it is returned instead.
    """

    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)

            except OptimizerError as e:
                error_tracker.add_error(e)
                if log_error_details:
                    log_error(
                        f"{error_message or 'Command failed'} in {func.__name__}: {e.message}",
                        error_code=e.error_code,
                        details=e.details,
                    )
                return fallback_value if fallback_value is not None else exit_code_for(e)

            except (OSError, ValueError) as e:
                if log_error_details:
                    log_error(
                        f"Input error in {func.__name__}: {e}",
                        traceback=traceback.format_exc(limit=3),
                    )
                return fallback_value if fallback_value is not None else EXIT_BAD_INPUT

        return wrapper

    return decorator


class ErrorTracker:
    """Track optimizer errors by code (sweeps use it for infeasible trials)."""

    def __init__(self, max_history: int = 100):
        self.max_history = max_history
        self.history: List[Dict[str, Any]] = []
        self._lock = threading.Lock()

    def add_error(self, error: OptimizerError) -> None:
        """Add error to tracking history."""
        record = {
            "timestamp": error.timestamp,
            "message": error.message,
            "error_code": error.error_code,
            "details": error.details,
        }
        with self._lock:
            self.history.append(record)
            if len(self.history) > self.max_history:
                self.history = self.history[-self.max_history :]

    def get_error_summary(self) -> Dict[str, Any]:
        """Get summary of recent errors."""
        with self._lock:
            errors = list(self.history)

        by_type: Dict[str, int] = {}
        for error in errors:
            by_type[error["error_code"]] = by_type.get(error["error_code"], 0) + 1

        return {"total": len(errors), "by_type": by_type, "recent": errors[-10:]}

    def clear(self) -> None:
        with self._lock:
            self.history = []


# Global error tracker
error_tracker = ErrorTracker()


def safe_execute(
    func: Callable,
    fallback_value: Any = None,
    error_message: Optional[str] = None,
    errors: Tuple[Type[OptimizerError], ...] = (OptimizerError,),
) -> Any:
    """Run ``func``; on one of ``errors`` record it and return the fallback.

    Other exceptions propagate.
    """
    try:
        return func()
    except errors as e:
        error_tracker.add_error(e)
        log_warning(
            error_message or f"Skipped: {e.message}",
            error_code=e.error_code,
            details=e.details,
        )
        return fallback_value
