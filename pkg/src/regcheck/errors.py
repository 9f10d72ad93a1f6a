"""Exception types shared across the toolkit."""

from __future__ import annotations


class RegcheckError(Exception):
    """Base class for all toolkit errors."""


class InvalidInput(RegcheckError):
    """An argument or input file violates a documented precondition."""


class MissingMetadata(RegcheckError):
    """Required metadata key (e.g. doc_id) is absent."""


class MalformedAnnotation(RegcheckError):
    """Annotation stream violates the 10-column format or tree invariants."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NoRootVerb(RegcheckError):
    """Sentence contains no verb to anchor role extraction."""


class DimensionMismatch(RegcheckError):
    """Embedding row length disagrees with the declared dimension."""

    def __init__(self, segment_id: str):
        self.segment_id = segment_id
        super().__init__(f"embedding for {segment_id!r} does not match declared dimension")


class DuplicateId(RegcheckError):
    """An identifier that must be unique occurs more than once."""


class ZeroVector(RegcheckError):
    """Cosine similarity is undefined for a zero-norm operand."""


class ScorerContractViolation(RegcheckError):
    """A sentence scorer returned a value outside [0, 1]."""


class MissingScore(RegcheckError):
    """A file-backed scorer has no entry for the requested pair."""


class AnswerUnavailable(RegcheckError):
    """No answer can be produced for the requested (question, span) pair."""


class UntrainableConcept(RegcheckError):
    """A concept has no usable training vectors for a centroid."""

    def __init__(self, concept_id: str):
        self.concept_id = concept_id
        super().__init__(f"concept {concept_id!r} has no non-zero training vectors")


class UnknownConcept(RegcheckError):
    """A concept id is not declared in the concept model."""


class InvalidRequirement(RegcheckError):
    """A legal requirement violates its invariants (e.g. empty frame)."""


class ParseError(RegcheckError):
    """Rule text could not be parsed."""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class CrossReferenceError(RegcheckError):
    """Identifiers are inconsistent across the supplied inputs."""
