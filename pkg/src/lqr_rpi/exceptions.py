"""Exception types raised across the package."""


class LqrError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(LqrError):
    """Operands have incompatible or malformed shapes."""


class StabilityError(LqrError):
    """A matrix required to be Hurwitz is not."""


class ConvergenceError(LqrError):
    """An iterative solver exhausted its budget without converging."""


class SingularBlockError(LqrError):
    """The gain-update block of an evaluation matrix is numerically singular."""


class DivergenceError(LqrError):
    """A simulated trajectory left the finite range of floating point."""


class ConfigError(LqrError):
    """An experiment configuration is malformed or inconsistent."""
