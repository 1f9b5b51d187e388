"""Exception types raised by the detection library."""


class NumericalError(ArithmeticError):
    """Base class for numerical failures (CLI exit code 3)."""


class RankDeficient(NumericalError):
    """Gram matrix of a basis fails the positive-definiteness tolerance."""


class NotPositiveDefinite(NumericalError):
    """A matrix expected to be Hermitian positive definite is not."""


class SingularBlock(NotPositiveDefinite):
    """A block whose inverse a detector needs is numerically singular."""


class SingularSecondary(SingularBlock):
    """The secondary-data scatter matrix S_c is singular."""


class InvalidCorrelation(ValueError):
    """Clutter correlation coefficient outside [0, 1)."""


class InvalidDims(ValueError):
    """Problem dimensions violate the model constraints."""


class ZeroSignal(ValueError):
    """A signal matrix with zero Frobenius norm cannot be scaled to a SINR."""


class TooManyDiscards(NumericalError):
    """More than 0.1% of Monte Carlo trials were numerically degenerate."""


class ConfigError(ValueError):
    """Malformed or schema-violating run configuration (CLI exit code 2)."""
