"""Exception hierarchy shared by the whole toolkit."""


class GraphParseError(Exception):
    """Base class for every error raised by graphparse."""


class ModelSyntaxError(GraphParseError):
    """A model document is not well-formed (bad JSON, unknown key, bad tag).

    Carries an optional (line, column) position when the underlying JSON
    parser provides one.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class ModelValidationError(GraphParseError):
    """Raised when an operation requires a validated model but got errors."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(str(d) for d in self.diagnostics)
        super().__init__(f"model has error diagnostics: {lines}")


class LexiconError(GraphParseError):
    """Malformed lexicon document or degenerate lexeme statistics."""


class ScanError(GraphParseError):
    """Input text could not be fully covered by token candidates."""

    def __init__(self, message, offset=None, slice_text=None):
        self.offset = offset
        self.slice_text = slice_text
        super().__init__(message)


class NothingToParseError(GraphParseError):
    """The lexical analysis graph is empty."""


class NoParseError(GraphParseError):
    """No complete parse exists for the input.

    ``offset`` is the character offset of the furthest chart column reached
    and ``expected`` lists the lexical element names that would have allowed
    the chart to advance there.
    """

    def __init__(self, message, offset=0, expected=()):
        self.offset = offset
        self.expected = sorted(expected)
        super().__init__(message)


class RegistryError(GraphParseError):
    """Unknown or duplicate registration of a constraint/evaluator/matcher."""


class AlgebraError(GraphParseError):
    """Score outside an algebra's domain, or no cast path between algebras."""


class EnumerationOverflowError(GraphParseError):
    """A candidate enumeration exceeded its combinatorial guard."""


class BundleError(GraphParseError):
    """A bundled data file is missing or fails its checksum."""
