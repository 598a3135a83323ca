"""Exception types raised across the package.

Every error carries a human-readable message; the class name is the
stable identifier used by the CLI for exit reporting.
"""


class HoloMimoError(Exception):
    """Base class for all package errors."""


class NonPositiveAperture(HoloMimoError):
    """An aperture side length is zero or negative."""


class DegenerateProjection(HoloMimoError):
    """A user plane is (numerically) perpendicular to the receiver plane."""


class TooClose(HoloMimoError):
    """Geometry violates the radiating-field distance floor."""


class BadNoiseDensity(HoloMimoError):
    """Noise density values are negative or non-physical."""


class QuadratureUnderresolved(HoloMimoError):
    """A quadrature rule has too few nodes for the requested integrand."""


class GridTooCoarse(HoloMimoError):
    """A sampling grid does not resolve the highest retained mode."""


class DimensionMismatch(HoloMimoError):
    """Array shapes are inconsistent with the operation's contract."""


class SingularNoise(HoloMimoError):
    """The noise covariance could not be factorized as positive definite."""


class NotPD(HoloMimoError):
    """A matrix required to be positive definite is not."""


class NotPSD(HoloMimoError):
    """A matrix required to be positive semidefinite is not."""


class MaxIterExceeded(HoloMimoError):
    """An iterative solver hit its iteration ceiling."""


class ParseError(HoloMimoError):
    """Configuration text could not be parsed."""


class ValidationError(HoloMimoError):
    """A configuration value is invalid."""


class EmptyInput(HoloMimoError):
    """An operation received an empty input it cannot act on."""


class CacheError(HoloMimoError):
    """A cache file is missing, truncated, or has a bad header."""
