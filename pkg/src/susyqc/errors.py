"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes, so new errors should subclass one of
the three leaves below rather than ``SusyError`` directly.
"""


class SusyError(Exception):
    """Base class for all package errors."""


class ArgumentError(SusyError, ValueError):
    """Bad input: out-of-range index, dimension mismatch, malformed file."""


class ValidationError(SusyError):
    """An operator or model fails a structural check (nilpotency, parity, ...)."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class NumericalIntegrityError(SusyError):
    """Two independent routes to the same quantity disagree."""


class GraphParseError(ArgumentError):
    """Edge-list parse failure; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
