"""Exception types shared across the pipeline."""


class ReviewError(Exception):
    """Base class for all pipeline errors."""


class MalformedDocumentError(ReviewError):
    """Annotated-document text that does not follow the marker grammar."""


class IntegrityError(ReviewError):
    """Collection-level inconsistency (counts, duplicates, metadata)."""


class MissingAnnotationError(ReviewError):
    """A requested reviewer has no annotations for a requested batch."""


class EmptyVocabularyError(ReviewError):
    """Vocabulary construction saw no usable training tokens."""


class DegenerateTrainingError(ReviewError):
    """Training data contains a single class."""


class InvalidHyperParameterError(ReviewError):
    """Hyper-parameter outside its legal range."""


class InvalidLabelError(ReviewError):
    """A tag sequence violates the B/I/O well-formedness rules."""


class InvalidSpanError(ReviewError):
    """A paragraph span is empty or does not partition the sequence."""


class EmptySequenceError(ReviewError):
    """A document yielded no tokens to tag."""


class StratificationError(ReviewError):
    """A stratified split cannot be formed from the given data."""


class ConfigurationError(ReviewError):
    """An experiment configuration violates its condition's constraints."""
