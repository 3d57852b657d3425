"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: ConfigError -> 2,
DataError (and subclasses) -> 3, NumericError -> 4.
"""

from __future__ import annotations


class NutsortError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(NutsortError, ValueError):
    """Operands have incompatible shapes; the message names both."""


class ParameterError(NutsortError, ValueError):
    """A caller-supplied parameter is out of its valid range."""


class ConfigError(NutsortError, ValueError):
    """A run configuration is invalid (unknown key, bad type, bad value)."""


class DataError(NutsortError, ValueError):
    """Dataset ingestion, splitting, or file parsing failed."""


class ModelFormatError(DataError):
    """A model file is malformed; carries the byte offset of the defect."""

    def __init__(self, message: str, offset: int | None = None) -> None:
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class NumericError(NutsortError, ArithmeticError):
    """Training produced a non-finite loss or gradient."""

    def __init__(self, message: str, phase: str | None = None, iteration: int | None = None) -> None:
        if phase is not None:
            message = f"{message} [phase={phase}, iteration={iteration}]"
        super().__init__(message)
        self.phase = phase
        self.iteration = iteration
