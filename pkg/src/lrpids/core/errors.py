"""
lrpids Error Classification System.

This module defines the exception hierarchy raised by the simulator and the
rules that map any failure to one of three user-facing categories:

1.  **CONFIG_ERROR**: The experiment description is invalid (unknown keys,
    out-of-range coefficients, mismatched dimensions, unreadable files).
    The user must edit the configuration; exit code 2.
2.  **NUMERICAL_ERROR**: The configuration is valid but the requested
    computation cannot be carried out at desk scale (matrix above the dense
    threshold, kernel tail too heavy for the truncation cap, too few usable
    points for a fit, eigensolver failure); exit code 3.
3.  **UNKNOWN_ERROR**: Anything else; exit code 1.

The CLI serializes the resulting `ClassifiedError` as JSON on stderr so batch
drivers can react to failures without parsing console output.
"""

import json
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import ValidationError

logger = logging.getLogger("lrpids")


class ErrorType(Enum):
    """
    Enumeration of possible error types for classification.

    Attributes:
        CONFIG_ERROR: The experiment configuration or an input is invalid.
        NUMERICAL_ERROR: A valid request that cannot be computed at this scale.
        UNKNOWN_ERROR: Fallback for unclassifiable errors.
    """
    CONFIG_ERROR = "config_error"
    NUMERICAL_ERROR = "numerical_error"
    UNKNOWN_ERROR = "unknown_error"


EXIT_CODES = {
    ErrorType.CONFIG_ERROR: 2,
    ErrorType.NUMERICAL_ERROR: 3,
    ErrorType.UNKNOWN_ERROR: 1,
}


class LrpIdsError(Exception):
    """Base class for all errors raised by lrpids."""

    error_type: ErrorType = ErrorType.UNKNOWN_ERROR
    suggestion: str = "Run with --verbose for detailed logs."

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class ConfigError(LrpIdsError):
    """The experiment configuration is invalid."""

    error_type = ErrorType.CONFIG_ERROR
    suggestion = "Fix the configuration file and run again."


class DimensionMismatchError(ConfigError):
    """A lattice vector or kernel does not match the model dimension."""


class InvalidInputError(ConfigError):
    """An argument violates an operation's precondition."""


class EmptyDataError(InvalidInputError):
    """There is nothing to plot or export."""


class GraphMismatchError(ConfigError):
    """A window graph was sampled under different model parameters."""

    suggestion = "Resample the window with the same ModelParams or clear the cache."


class NumericalError(LrpIdsError):
    """A valid request that cannot be carried out numerically."""

    error_type = ErrorType.NUMERICAL_ERROR
    suggestion = "Reduce the window radius or relax the numerical tolerances."


class DenseLimitError(NumericalError):
    """The matrix is larger than the dense eigensolver threshold."""

    suggestion = "Reduce n or raise LRPIDS_DENSE_LIMIT if memory allows."


class TruncationCapError(NumericalError):
    """The truncation radius for the requested tolerance exceeds the hard cap."""

    suggestion = "Increase trunc_tol or LRPIDS_MAX_TRUNCATION_RADIUS."


class LifshitzFitError(NumericalError):
    """Too few usable grid points to fit a low-energy exponent."""

    suggestion = "Use a coarser energy grid or more realizations."


class CacheCorruptionError(LrpIdsError):
    """A cache entry failed its checksum; callers recompute instead of failing."""


@dataclass
class ClassifiedError:
    """
    Internal representation of a classified error.

    This dataclass holds the result of the error analysis in a format that is
    easy to print and to serialize for the stderr channel.
    """
    error_type: ErrorType
    message: str
    suggestion: str
    original_error: str
    field: Optional[str] = None

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.error_type]

    def to_dict(self):
        """Converts the object to a dictionary for serialization."""
        return {
            "error_type": self.error_type.value,
            "message": self.message,
            "suggestion": self.suggestion,
            "original_error": self.original_error,
            "field": self.field,
            "exit_code": self.exit_code,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _classify_validation_error(exc: ValidationError) -> ClassifiedError:
    first = exc.errors()[0]
    location = ".".join(str(part) for part in first.get("loc", ()))
    message = first.get("msg", str(exc))
    if first.get("type") == "extra_forbidden":
        message = f"Unknown key '{location}' is not allowed"
    return ClassifiedError(
        error_type=ErrorType.CONFIG_ERROR,
        message=message,
        suggestion="Check the field against the configuration reference in docs/configuration.md.",
        original_error=str(exc)[:500],
        field=location or None,
    )


def classify_error(exc: BaseException) -> ClassifiedError:
    """
    Maps an exception raised anywhere in a run to a `ClassifiedError`.

    Args:
        exc (BaseException): The exception to classify.

    Returns:
        ClassifiedError: The error category, message and suggested fix.
    """
    if isinstance(exc, ValidationError):
        return _classify_validation_error(exc)

    if isinstance(exc, LrpIdsError):
        return ClassifiedError(
            error_type=exc.error_type,
            message=str(exc),
            suggestion=exc.suggestion,
            original_error=f"{type(exc).__name__}: {exc}"[:500],
            field=exc.field,
        )

    if isinstance(exc, json.JSONDecodeError):
        return ClassifiedError(
            error_type=ErrorType.CONFIG_ERROR,
            message=f"Configuration is not valid JSON (line {exc.lineno}, column {exc.colno})",
            suggestion="Fix the JSON syntax of the configuration file.",
            original_error=str(exc)[:500],
        )

    if isinstance(exc, (FileNotFoundError, IsADirectoryError, PermissionError)):
        return ClassifiedError(
            error_type=ErrorType.CONFIG_ERROR,
            message=f"Cannot read input: {exc}",
            suggestion="Check the path and permissions of the configuration file.",
            original_error=str(exc)[:500],
        )

    if isinstance(exc, (np.linalg.LinAlgError, FloatingPointError, MemoryError)):
        return ClassifiedError(
            error_type=ErrorType.NUMERICAL_ERROR,
            message=f"Numerical failure: {exc}",
            suggestion=NumericalError.suggestion,
            original_error=f"{type(exc).__name__}: {exc}"[:500],
        )

    logger.debug(f"Unclassified error {type(exc).__name__}: {exc}")
    return ClassifiedError(
        error_type=ErrorType.UNKNOWN_ERROR,
        message=f"Unexpected error ({type(exc).__name__}): {exc}"[:300],
        suggestion="Run with --verbose for detailed logs.",
        original_error=str(exc)[:500],
    )


def format_error_for_display(classified_error: ClassifiedError, verbose: bool = False) -> str:
    """
    Formats a classified error for user-friendly display in the CLI.

    Args:
        classified_error (ClassifiedError): The classified error object to format.
        verbose (bool, optional): Whether to include the original error message. Defaults to False.

    Returns:
        str: A formatted string ready for printing to the console.
    """
    error_type_display = {
        ErrorType.CONFIG_ERROR: "[CONFIG ERROR] Fix Required",
        ErrorType.NUMERICAL_ERROR: "[NUMERICAL ERROR]",
        ErrorType.UNKNOWN_ERROR: "[UNKNOWN ERROR]",
    }

    lines = [
        f"\n{'='*60}",
        f"{error_type_display.get(classified_error.error_type, 'Error')}",
        f"{'='*60}",
        f"\nProblem: {classified_error.message}",
    ]
    if classified_error.field:
        lines.append(f"Field: {classified_error.field}")
    lines.append(f"\nSolution: {classified_error.suggestion}")

    if verbose and classified_error.original_error:
        lines.append(f"\nOriginal Error:\n{classified_error.original_error}")

    lines.append(f"{'='*60}\n")
    return "\n".join(lines)
