class SpectralBAIError(Exception):
    """Base class for all errors raised by this package."""


class AmbiguousBestArm(SpectralBAIError, ValueError):
    """The mean vector has more than one maximal entry."""


class SingularSystem(SpectralBAIError, ArithmeticError):
    """The reduced linear system of the spectral oracle could not be factorized."""


class BracketFailure(SpectralBAIError, ArithmeticError):
    """No admissible Lagrange multiplier was found for the smoothness constraint."""
