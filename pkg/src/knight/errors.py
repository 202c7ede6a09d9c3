"""Exception taxonomy shared across the package.

Every error raised by knight code derives from KnightError so callers
(and the CLI) can distinguish data problems from programming bugs.
"""


class KnightError(Exception):
    """Base class for all knight errors."""


class ZeroVector(KnightError):
    """Vector norm below the degeneracy threshold; cannot normalize."""


class DimMismatch(KnightError):
    """Operands disagree on embedding or tensor dimensions."""


class EmptyInput(KnightError):
    """An operation that requires at least one element got none."""


class EmptyCorpus(KnightError):
    """Corpus-level operation invoked with no records."""


class DuplicateId(KnightError):
    """Record or tensor identifiers must be unique."""


class CountMismatch(KnightError):
    """Caption line count and embedding row count disagree."""


class MalformedLine(KnightError):
    """A JSONL line failed to parse or violates the schema.

    Carries the 1-based line number when known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class BadMagic(KnightError):
    """Binary file does not start with the expected magic bytes."""


class BadVersion(KnightError):
    """Binary file carries an unsupported format version."""


class TruncatedPayload(KnightError):
    """Binary file ends before the declared payload does."""


class MissingTensor(KnightError):
    """Checkpoint lacks a tensor the model requires."""


class UnknownTensor(KnightError):
    """Checkpoint carries a tensor name the model does not recognize."""


class ShapeMismatch(KnightError):
    """Tensor shapes do not line up."""


class EmptyCaption(KnightError):
    """Caption is empty or contains no embeddable tokens."""


class LengthExceeded(KnightError):
    """Prefix plus token sequence does not fit the positional table."""


class KTooLarge(KnightError):
    """Requested k exceeds what the corpus can provide."""


class NonFiniteGradient(KnightError):
    """A gradient tensor contains NaN or Inf; the update step is aborted."""


class EmptyEvalSet(KnightError):
    """Metric computation invoked with no candidate/reference pairs."""


class MissingReference(KnightError):
    """A candidate id has no reference entry."""

    def __init__(self, pair_id):
        super().__init__(f"no reference entry for id {pair_id}")
        self.pair_id = pair_id
