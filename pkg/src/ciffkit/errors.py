"""Exception hierarchy shared by all ciffkit layers."""


class CiffError(Exception):
    """Base class for every error raised by this package."""


# --- wire level ---------------------------------------------------------


class CodecError(CiffError):
    """A byte-level encoding or decoding failure."""


class TruncatedVarint(CodecError):
    """Input ended while a varint's continuation bit was still set."""


class OverlongVarint(CodecError):
    """Varint longer than 10 bytes or exceeding the unsigned 64-bit range."""


class NegativeValue(CodecError):
    """A negative integer was supplied for an unsigned wire field."""


class TruncatedRecord(CodecError):
    """Record payload ended in the middle of a field."""


class UnknownWireKind(CodecError):
    """Field tag carries a wire-kind code this format does not accept."""


class TruncatedStream(CodecError):
    """Stream ended inside a length prefix or a record payload."""


class LengthOverflow(CodecError):
    """A delimited record declares a length above the configured cap."""


class CorruptGzip(CodecError):
    """File announced gzip magic bytes but cannot be decompressed."""


# --- model level --------------------------------------------------------


class InvariantViolation(CiffError):
    """A structural invariant of the exchange format does not hold."""


class NotIncreasing(InvariantViolation):
    """Docid sequence is not strictly increasing (or contains negatives)."""


class ZeroGap(InvariantViolation):
    """A non-initial docid gap of zero, i.e. a duplicated docid."""


class CountMismatch(CiffError):
    """Stream ended before the header-declared record counts, or has trailing data."""


class UnsupportedVersion(CiffError):
    """Export header carries a version this reader does not understand."""


class MissingDocRecord(CiffError):
    """A posting references a docid with no document record."""


# --- indexing / retrieval / evaluation ----------------------------------


class DuplicateCollectionDocid(CiffError):
    """Two corpus documents share the same external identifier."""


class DomainError(CiffError):
    """Scoring-function argument outside its mathematical domain."""


class MalformedLine(CiffError):
    """A line-oriented input file has a line that does not parse."""

    def __init__(self, message, line_number=None):
        super().__init__(message if line_number is None else f"line {line_number}: {message}")
        self.line_number = line_number


class MalformedRun(CiffError):
    """Run file violates the 6-column format or its per-topic rank order."""


class UnknownDocid(CiffError):
    """A result references a docid absent from the index document table."""


class GradeExceedsGmax(CiffError):
    """A relevance grade is larger than the configured maximum grade."""
