"""Exception types shared across the package."""


class SemmatchError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SemmatchError):
    """A malformed input file or stream. Carries a line number when known."""

    def __init__(self, message: str, *, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class ValidationError(SemmatchError):
    """Structurally well-formed input that violates an invariant."""


class UnknownRefError(ValidationError):
    """A synset id, concept id, or endpoint ref that does not resolve."""


class TickLimitExceeded(SemmatchError):
    """The simulation ran past its configured tick budget."""
