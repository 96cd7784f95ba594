"""Exception hierarchy shared by all gmtc modules."""


class GmtcError(Exception):
    """Base class for all errors raised by this package."""


class NonHermitianInput(GmtcError):
    """Matrix fails the Hermitian symmetry tolerance."""


class DimensionMismatch(GmtcError):
    """Vector/matrix dimensions are inconsistent."""


class DimensionOverflow(GmtcError):
    """Requested dimension exceeds the configured maximum."""


class EmptyDataset(GmtcError):
    """An operation that needs samples received none."""


class DegenerateFit(GmtcError):
    """All mixture components collapsed during fitting."""


class InfeasibleTarget(GmtcError):
    """Rate/distortion target is outside the achievable region."""


class SymbolOutOfSupport(GmtcError):
    """Symbol not representable under its entropy model."""


class CorruptStream(GmtcError):
    """Bitstream violates the coder state or container framing."""


class DictionaryMismatch(GmtcError):
    """Bitstream was produced under a different dictionary."""


class AllocationMismatch(GmtcError):
    """Rate allocation was not derived from the supplied dictionary."""


class IndivisibleBlock(GmtcError):
    """Segment size does not divide the stacked vector length."""


class FormatError(GmtcError):
    """On-disk container is malformed or has an unsupported version."""


class InvariantViolation(GmtcError):
    """A result violated a checked mathematical invariant."""
