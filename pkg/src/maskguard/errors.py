"""Exception types raised across the toolkit.

Every error carries enough context (sample id, byte offset, module) to be
reported by the CLI without a traceback.
"""


class MaskguardError(Exception):
    """Base class for all toolkit errors."""


class ParseError(MaskguardError):
    """Source text could not be parsed.

    Carries the byte offset of the first offending token when known.
    """

    def __init__(self, message, offset=None, sample_id=None):
        self.offset = offset
        self.sample_id = sample_id
        if offset is not None:
            message = "%s (byte offset %d)" % (message, offset)
        if sample_id is not None:
            message = "[sample %s] %s" % (sample_id, message)
        super().__init__(message)


class UnsupportedLanguage(MaskguardError):
    """No grammar plugin is registered for the requested language."""


class SpanOutOfBounds(MaskguardError):
    """A byte span does not lie inside the source text."""


class OracleUnavailable(MaskguardError):
    """A remote prediction endpoint failed or returned a non-200 status."""


class ModelNotTrained(MaskguardError):
    """predict() was called on a surrogate before train() or load()."""


class LabelOutOfRange(MaskguardError):
    """A reference label is outside the model's label set."""


class DegenerateCorpus(MaskguardError):
    """A training corpus has fewer than two distinct labels."""


class EmptyScores(MaskguardError):
    """Entropy was requested for an empty suspicion score list."""


class InfillerUnavailable(MaskguardError):
    """An infilling backend failed or left mask tokens in its output."""


class NoCandidate(MaskguardError):
    """The infiller has no replacement candidate for a masked element."""


class NoRenameTarget(MaskguardError):
    """An identifier-renaming trigger found no identifier to rename."""


class UnparseableResult(MaskguardError):
    """A trigger insertion produced source text that no longer parses."""


class EmptyCorpus(MaskguardError):
    """An operation requires a non-empty corpus."""


class EmptyOutcomeSet(MaskguardError):
    """A metric was requested over zero outcomes."""
