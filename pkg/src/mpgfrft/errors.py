"""Exception hierarchy shared by all mpgfrft modules."""


class MpgfrftError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(MpgfrftError, ValueError):
    """An argument violates a documented precondition."""


class ConstructionFailedError(MpgfrftError, RuntimeError):
    """A randomized construction did not succeed within its retry budget."""


class DegenerateSpectrumError(MpgfrftError, RuntimeError):
    """The GFT matrix has (numerically) repeated eigenvalues.

    Carries the offending pair gap so callers can see how close to
    degeneracy the spectrum is.
    """

    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap


class ZeroEigenvalueError(MpgfrftError, ValueError):
    """Fractional power or logarithm requested for a zero eigenvalue."""


class NotInvertibleError(MpgfrftError, RuntimeError):
    """A type-II operator failed the invertibility condition."""


class UnsupportedKindError(MpgfrftError, ValueError):
    """The requested transform kind is not valid for this operation."""


class DivergedError(MpgfrftError, RuntimeError):
    """Training produced non-finite values or could not recover."""


class UndefinedMetricError(MpgfrftError, ValueError):
    """A metric denominator is zero."""


class DegenerateOrbitError(MpgfrftError, RuntimeError):
    """A chaotic orbit collapsed onto a fixed point of the map."""


class MalformedCiphertextError(MpgfrftError, ValueError):
    """Ciphertext bytes or DNA bases do not decode."""


class InvalidKeyError(MpgfrftError, ValueError):
    """A cipher key fails validation or does not match the ciphertext."""


class ParseError(MpgfrftError, ValueError):
    """A CSV or config file could not be parsed."""


class FormatError(MpgfrftError, ValueError):
    """An image file has an unsupported format."""
