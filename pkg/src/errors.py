"""Error hierarchy shared by the library and the CLI exit-code mapping."""

from __future__ import annotations

from typing import Any, Optional


class PinTwsvmError(RuntimeError):
    exit_code = 1


class ConfigError(PinTwsvmError):
    exit_code = 2


class DatasetError(PinTwsvmError):
    exit_code = 3

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DimensionError(PinTwsvmError):
    exit_code = 3


class DegenerateDatasetError(PinTwsvmError):
    exit_code = 3


class AssemblyError(PinTwsvmError):
    exit_code = 3


class DegenerateModelError(PinTwsvmError):
    exit_code = 3


class CrossValidationError(PinTwsvmError):
    exit_code = 3


class DetectionError(PinTwsvmError):
    exit_code = 3


class StorageError(PinTwsvmError):
    """A model, table or data file could not be read or written."""

    exit_code = 3


class InfeasibleProblemError(PinTwsvmError):
    exit_code = 4


class NonConvexProblemError(PinTwsvmError):
    exit_code = 4


class UnboundedProblemError(PinTwsvmError):
    exit_code = 4


class ConvergenceError(PinTwsvmError):
    """Raised when a solve stops at max_iter; `solution` holds the last iterate."""

    exit_code = 4

    def __init__(self, message: str, solution: Any = None) -> None:
        self.solution = solution
        super().__init__(message)


def describe(exc: PinTwsvmError) -> str:
    """One-line, machine-parseable failure reason used by the CLI."""
    reason = " ".join(str(exc).split())
    return f"error={type(exc).__name__} exit={exc.exit_code} reason={reason}"


def from_exception(exc: Exception) -> PinTwsvmError:
    """Map an OSError or ValueError escaping a dependency onto the hierarchy."""
    if isinstance(exc, PinTwsvmError):
        return exc
    if isinstance(exc, OSError):
        target = f": {exc.filename}" if exc.filename else ""
        return StorageError(f"{exc.strerror or exc}{target}")
    return DatasetError(str(exc) or type(exc).__name__)
