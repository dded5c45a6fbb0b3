"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class FinslerError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(FinslerError, ValueError):
    """A point lies outside the slit tangent bundle, or a function left its domain."""


class OrderTooHigh(FinslerError, ValueError):
    """A jet of higher order was requested than the engine supports or holds."""


class SingularMetric(FinslerError, ArithmeticError):
    """The fundamental tensor is (numerically) singular at the evaluation point."""


class UnknownMetric(FinslerError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class BadParams(FinslerError, ValueError):
    pass


class ParseError(FinslerError, ValueError):
    """Syntax error in an energy expression.

    Carries the 1-based ``line`` and ``column`` of the offending token and the
    set of tokens that would have been accepted there.
    """

    def __init__(self, message: str, line: int = 1, column: int = 1,
                 expected: frozenset[str] | set[str] = frozenset()):
        self.message = message
        self.line = line
        self.column = column
        self.expected = frozenset(expected)
        super().__init__(self._format())

    def _format(self) -> str:
        text = f"{self.message} at line {self.line}, column {self.column}"
        if self.expected:
            text += "; expected one of: " + ", ".join(sorted(self.expected))
        return text


class UnknownIdentifier(ParseError):
    pass


class DimensionMismatch(ParseError):
    pass
