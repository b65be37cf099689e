"""Exception hierarchy shared by the library and the command line."""


class HermRandError(Exception):
    """Base class for all library errors."""


class DegreeOverflowError(HermRandError, ValueError):
    """A Hermite degree exceeds the configured envelope."""


class NonFiniteInputError(HermRandError, ValueError):
    pass


class OrderOverflowError(HermRandError, ValueError):
    """Quadrature order or matrix size outside the supported range."""


class InvalidWindowError(HermRandError, ValueError):
    pass


class EmptyWindowError(HermRandError, ValueError):
    pass


class NonPositiveTimeError(HermRandError, ValueError):
    pass


class ProfileError(HermRandError, ValueError):
    """Coefficient profile has the wrong length or vanishes identically."""


class ZeroVectorError(HermRandError, ValueError):
    pass


class DomainError(HermRandError, ValueError):
    pass


class GridEnvelopeError(HermRandError, ValueError):
    """Eigenfunction degrees exceed what a quadrature grid was designed for."""


class ExponentError(HermRandError, ValueError):
    """Incompatible exponents for an interpolation inequality."""


class DegenerateAbscissaError(HermRandError, ValueError):
    pass


class InsufficientSamplesError(HermRandError):
    """Too few exceedances to support a tail fit.

    The partially computed report is attached as ``report`` so callers can
    still serialize it.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConfigError(HermRandError, ValueError):
    pass


class SizeOverflowError(HermRandError, ValueError):
    """Requested matrix or basis exceeds the supported size."""
