"""Exception types raised across the package."""

from __future__ import annotations


class StackoptError(Exception):
    """Base class for all package errors."""


class InvalidParameter(StackoptError, ValueError):
    """A model parameter violates its documented range."""


class ConfigInvalid(StackoptError, ValueError):
    """An optimizer or sweep configuration is malformed."""


class DegenerateDenominator(StackoptError, ArithmeticError):
    """Development hours after automation are zero, so the quality ratio is undefined."""


class NonpositiveBase(StackoptError, ValueError):
    """Baseline cost used for normalization is not positive."""


class EmptyInput(StackoptError, ValueError):
    """An aggregate was requested over no values."""


class ScenarioFileError(StackoptError):
    """Problem reading a scenario file."""


class ParseError(ScenarioFileError, ValueError):
    def __init__(self, message: str, source: str = "<input>", line: int | None = None, column: int | None = None):
        self.source = source
        self.line = line
        self.column = column
        where = source if line is None else f"{source}:{line}:{column}"
        super().__init__(f"{where}: {message}")


class ValidationError(ScenarioFileError, ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class IoError(ScenarioFileError, OSError):
    pass
