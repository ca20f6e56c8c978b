"""Exception hierarchy shared across the package."""


class QStyleGANError(Exception):
    """Base class for all package errors."""


class ConfigurationError(QStyleGANError, ValueError):
    """Invalid configuration or out-of-range setup parameter."""


class ArgumentError(QStyleGANError, ValueError):
    """Invalid argument to an operation (bad index, shape mismatch, ...)."""


class ParseError(QStyleGANError, ValueError):
    """Malformed input file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UndefinedSignificanceError(QStyleGANError, ArithmeticError):
    """Z0 significance requested for a metric with zero combined spread."""
