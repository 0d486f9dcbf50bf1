"""Exception types shared across the evaluation library."""

from __future__ import annotations


class OverlapEvalError(Exception):
    """Base class for all library errors."""


class DimMismatchError(OverlapEvalError):
    """Vectors or batches with incompatible dimensions."""


class EmptySummaryError(OverlapEvalError):
    """A summary had no sentences where at least one was required."""


class InvalidScoreError(OverlapEvalError):
    """A similarity score fell outside [0, 1]."""


class AlignmentError(OverlapEvalError):
    """Label sequences or score tables that should align do not."""

    def __init__(self, message: str, ids: list[str] | None = None):
        super().__init__(message)
        self.ids = ids or []


class DegenerateInputError(OverlapEvalError):
    """Correlation input with zero variance on one side."""


class EmptyInputError(OverlapEvalError):
    """An aggregate was requested over zero items."""


class MissingEmbeddingError(OverlapEvalError):
    """Precomputed store has no vector for the requested sentence."""


class BackendUnavailableError(OverlapEvalError):
    """Remote embedding service failed after bounded retries."""


class CorruptBackendError(OverlapEvalError):
    """Backend returned inconsistent dimensions or malformed vectors."""


class ParseError(OverlapEvalError):
    """Malformed line in a JSONL input file."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SchemaError(OverlapEvalError):
    """Missing or invalid field in a dataset record."""

    def __init__(self, field: str, line: int, message: str | None = None):
        detail = message or f"missing or invalid field {field!r}"
        super().__init__(f"line {line}: {detail}")
        self.field = field
        self.line = line


class DuplicateIdError(OverlapEvalError):
    """Two records in one split share a sample id."""


class MissingSystemOutputError(OverlapEvalError):
    """A sample lacks the output of the requested system."""
