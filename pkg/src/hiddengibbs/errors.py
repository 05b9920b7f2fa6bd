"""Exception types shared across the package."""


class HiddenGibbsError(Exception):
    """Base class for all package errors."""


class EnumerationCapError(HiddenGibbsError):
    """An exhaustive enumeration would exceed the configured word cap."""


class AlphabetMismatchError(HiddenGibbsError):
    """A word or vector was used with an incompatible alphabet/index set."""


class NotPrimitiveError(HiddenGibbsError):
    """A square nonnegative matrix has no strictly positive power within
    the Wielandt bound (dim - 1)**2 + 1."""


class RowAllowabilityError(HiddenGibbsError):
    """A matrix with an all-zero row was applied to a positive vector."""


class CertificationError(HiddenGibbsError):
    """A certified quantity cannot be produced: non-summable variation tail,
    unreachable tolerance, or a missing closed-form bound."""


class SpecValidationError(HiddenGibbsError):
    """A problem specification failed referential-integrity validation."""
