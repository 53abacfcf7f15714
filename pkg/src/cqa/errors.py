"""Exception hierarchy shared by all modules."""


class CQAError(Exception):
    """Base class for every error raised by this package."""


class ParseError(CQAError, ValueError):
    """Malformed database, query or graph text."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaError(CQAError, ValueError):
    """Arity or key declaration mismatch between facts, atoms and schema."""


class LimitExceeded(CQAError):
    """An exhaustive enumeration would exceed its configured cap."""


class QueryShapeError(CQAError, ValueError):
    """The query is outside the fragment an algorithm is defined for."""


class InvariantViolation(CQAError, AssertionError):
    """A structural property that must always hold was found broken."""
