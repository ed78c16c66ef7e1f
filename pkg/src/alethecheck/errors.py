"""Exception hierarchy shared by the parser, checker and elaborator."""

from __future__ import annotations


class AletheError(Exception):
    """Base class; carries an optional source position."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def __str__(self) -> str:
        if self.line is None:
            return self.message
        return f"{self.line}:{self.col}: {self.message}"


class LexError(AletheError):
    pass


class ParseError(AletheError):
    pass


class SortError(AletheError):
    pass


class UndeclaredSymbol(AletheError):
    pass


class UnsupportedCommand(AletheError):
    pass


class UnknownPremise(AletheError):
    pass


class UnclosedAnchor(AletheError):
    pass


class DuplicateStepId(AletheError):
    pass


class NoGoal(AletheError):
    pass


class ScopeError(AletheError):
    pass


class Unelaborable(AletheError):
    pass
