"""Exception types shared across the pipeline."""

from __future__ import annotations


class NominaError(Exception):
    """Base class for all library errors."""


class EmptyText(NominaError):
    """Raised when a segmenter receives no usable text."""


class ParseError(NominaError):
    """Malformed input file (TEI, tagged text, config tables)."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}" + (f", col {col})" if col is not None else ")")
        super().__init__(message)


class IdError(NominaError):
    """Duplicate or non-contiguous segment identifiers."""


class GrammarError(NominaError):
    """Syntax or semantic error in a local-grammar rule."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}" + (f", col {col})" if col is not None else ")")
        super().__init__(message)


class LexiconError(NominaError):
    """A grammar references a lexicon that was not provided."""


class LinkShapeError(NominaError):
    """An alignment link group has an illegal shape."""


class EmptyDocument(NominaError):
    """Alignment requested on a document without sentences."""


class EditConflict(NominaError):
    """A correction references a stale link index or revision."""


class InvalidEdit(NominaError):
    """A correction would break the link partition invariants."""

    def __init__(self, message: str, violations: list | None = None):
        self.violations = violations or []
        super().__init__(message)


class PivotMismatch(NominaError):
    """Bitexts offered for merging do not share the same pivot."""


class InvalidBitext(NominaError):
    """A bitext failed link validation before merging."""

    def __init__(self, message: str, violations: list | None = None):
        self.violations = violations or []
        super().__init__(message)


class QueryError(NominaError):
    """Malformed multitext query."""


class Unlabeled(NominaError):
    """A name pair reached reporting without a procedure label."""


class ConfigError(NominaError):
    """Project configuration is missing or inconsistent."""


class StageOrderError(NominaError):
    """A pipeline stage ran before its predecessor."""


class StaleArtifact(NominaError):
    """A stage artifact no longer matches the recorded input hashes."""
