"""Exception types shared across the package."""


class SeqLcdError(Exception):
    """Base class for all errors raised by this package."""


class ZeroVector(SeqLcdError):
    """Normalization of an all-zero vector is undefined."""


class NonFiniteInput(SeqLcdError):
    """Input contains NaN or infinity."""


class EmptyImage(SeqLcdError):
    """Image with a zero-sized dimension."""


class DescriptorFileError(SeqLcdError):
    """Base for descriptor / matrix file format errors."""


class BadMagic(DescriptorFileError):
    pass


class UnsupportedVersion(DescriptorFileError):
    pass


class TruncatedFile(DescriptorFileError):
    pass


class NotUnitNorm(DescriptorFileError):
    """Stored descriptor is not unit length; files are normalized at write time."""


class DimMismatch(SeqLcdError):
    """Descriptor dimensions disagree."""


class RangeOutOfBounds(SeqLcdError):
    pass


class UncomputedEntry(SeqLcdError):
    """Requested a difference-matrix entry in a column that was never computed."""


class OutOfSeqRange(SeqLcdError):
    """Query window for a sequence score extends past the frame range."""


class QueryTooShort(SeqLcdError):
    """No query frame has a full matching window."""


class TooFewCandidates(SeqLcdError):
    """Fewer scored candidates than requested seed count."""


class InsufficientHistory(SeqLcdError):
    """Not enough trailing frames to compute the scene-change ratio."""


class NotInAnyRange(SeqLcdError):
    """Chosen match is outside every candidate range; indicates a bookkeeping bug."""


class FrameMismatch(SeqLcdError):
    """Match result and ground truth disagree on the query frames they cover."""


class BadConfig(SeqLcdError):
    pass


class IoFailure(SeqLcdError):
    pass
