"""
Exception Hierarchy

All errors raised by STACI derive from :class:`StaciError`. Parameter and data
problems also derive from ``ValueError`` and numerical failures from
``ArithmeticError`` so callers can catch them with the builtin types.
"""

from typing import Iterable, Optional


class StaciError(Exception):
    """Base class for every error raised by the package."""


class ParameterError(StaciError, ValueError):
    """An argument or configuration value is outside its valid domain."""


class ShapeError(ParameterError):
    """Array arguments have inconsistent shapes."""


class SizeError(ParameterError):
    """A problem is larger than the configured cap for an exact computation."""


class ConfigError(ParameterError):
    """A configuration file or key is invalid."""


class DataError(StaciError, ValueError):
    """
    Input data could not be parsed.

    Args:
        message: Description of the problem
        lines: 1-based line numbers of the offending rows, if known
    """

    def __init__(self, message: str, lines: Optional[Iterable[int]] = None):
        self.lines = sorted(lines) if lines is not None else []
        if self.lines:
            shown = ", ".join(str(n) for n in self.lines[:20])
            more = "" if len(self.lines) <= 20 else f" (+{len(self.lines) - 20} more)"
            message = f"{message} (lines {shown}{more})"
        super().__init__(message)


class NumericalError(StaciError, ArithmeticError):
    """
    A computation produced non-finite values or a factorization failed.

    Args:
        message: Description of the problem
        where: Location of the failure (layer index, particle index, ...)
    """

    def __init__(self, message: str, where: Optional[str] = None):
        self.where = where
        if where is not None:
            message = f"{message} [{where}]"
        super().__init__(message)
