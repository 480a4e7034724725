"""Exception types shared across the package.

Everything raised on bad input derives from FactGraphError so callers (and
the CLI) can distinguish our diagnostics from genuine bugs.
"""


class FactGraphError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(FactGraphError):
    """Tensor shapes incompatible with the requested operation."""


class DomainError(FactGraphError):
    """Input outside an operation's mathematical domain (e.g. empty sequence)."""


class ContractError(FactGraphError):
    """An API precondition was violated (wrong rank, missing grad, bad index)."""


class ConfigError(FactGraphError):
    """Invalid configuration value or combination."""


class ParseError(FactGraphError):
    """Malformed input file. Carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class TreeStructureError(FactGraphError):
    """Dependency heads do not form a single rooted tree."""

    def __init__(self, message: str, sentence_id: str | None = None):
        if sentence_id is not None:
            message = f"sentence {sentence_id!r}: {message}"
        super().__init__(message)
        self.sentence_id = sentence_id


class ScoreRangeError(FactGraphError):
    """Factuality score outside [-3, +3]."""


class AlignmentError(FactGraphError):
    """Annotation or manifest entry does not line up with the parsed corpus."""
