"""Semantic exception hierarchy.

Every error raised by this package derives from MorphlabError so callers can
distinguish toolkit failures from programming errors. The CLI maps validation
errors to exit code 2 and backend failures to exit code 3.
"""

from __future__ import annotations


class MorphlabError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(MorphlabError):
    """Vectors or collections with incompatible dimensions."""


class NonFiniteValue(MorphlabError):
    """NaN or infinity where a finite real is required."""


class ZeroVector(MorphlabError):
    """A direction-dependent operation received an all-zero vector."""


class LambdaOutOfRange(MorphlabError):
    """Interpolation weight outside [0, 1]."""


class AntipodalInputs(MorphlabError):
    """Spherical interpolation between (near-)antipodal vectors is undefined."""


class MissingMetadata(MorphlabError):
    """Embeddings reference subjects without a metadata entry."""

    def __init__(self, subject_ids: list[str]):
        self.subject_ids = list(subject_ids)
        super().__init__(f"no metadata for subjects: {', '.join(self.subject_ids)}")


class InsufficientSubjects(MorphlabError):
    """A split does not contain two distinct subjects to pair."""


class EmptyScoreSet(MorphlabError):
    """A metric was asked to operate on an empty score collection."""


class UnevenProbeCounts(MorphlabError):
    """Attempt-level metrics need one probe count shared by all subjects."""


class KeyMismatch(MorphlabError):
    """Score inputs are not keyed consistently across models / morph types."""


class ParseError(MorphlabError):
    """Malformed input file; carries 1-based line and column."""

    def __init__(self, path, line: int, column: int, message: str):
        self.path = str(path)
        self.line = line
        self.column = column
        super().__init__(f"{self.path}:{line}:{column}: {message}")


class SchemaError(MorphlabError):
    """Structurally valid file or value violating a type invariant."""


class InvalidParameter(MorphlabError):
    """A caller-supplied parameter outside its documented range."""


class NonUnitSubject(MorphlabError):
    """Toy-world subject vectors must be unit norm."""


class BackendFailure(MorphlabError):
    """A morph backend failed at the request or protocol level.

    ``request_ids`` names the failing requests when the failure is
    request-level; ``results`` carries any partial pipeline output.
    """

    def __init__(self, message: str, request_ids: list[str] | None = None, results=None):
        self.request_ids = list(request_ids or [])
        self.results = results
        super().__init__(message)
