"""Exception types shared across the package."""


class RitError(Exception):
    """Base class for all package errors."""


class EmptyTextError(RitError):
    """Text input was empty or contained no tokens."""


class InvalidDimError(RitError):
    """Requested embedding dimension is not a positive integer."""


class DimMismatchError(RitError):
    """Two vectors (or a vector and a corpus) have different dimensions."""


class BackendUnavailableError(RitError):
    """A remote backend could not be reached."""


class BackendProtocolError(RitError):
    """A remote backend answered with a malformed or inconsistent payload."""


class CorpusParseError(RitError):
    """A persisted corpus/table file has a malformed record."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class NotFoundError(RitError):
    """Referenced entry or file does not exist."""


class PromptParseError(RitError):
    """A mock generator could not locate the prompt markers."""


class NoContextError(RitError):
    """Contextualized rendering called with an empty context list."""


class InvalidConfigError(RitError):
    """Configuration value outside its allowed range."""


class InvalidInputError(RitError):
    """Mismatched or empty inputs to an evaluation routine."""
