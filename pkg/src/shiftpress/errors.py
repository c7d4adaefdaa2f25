"""Exception hierarchy shared by every module."""


class ShiftPressError(Exception):
    """Base class for all library errors."""


class ConfigError(ShiftPressError, ValueError):
    """A configuration document or domain object violates its schema."""


class NumericalError(ShiftPressError, ArithmeticError):
    """A numerical precondition failed (bad bracket, depth too small, ...)."""


class DepthExceeded(NumericalError):
    """A tabulated psi was queried beyond its depth cap."""


class InvalidDepth(NumericalError, ValueError):
    """A depth or order argument is outside its admissible range."""


class InsufficientDepth(NumericalError):
    """The representable depth is too shallow for the requested scale."""


class Infeasible(NumericalError):
    """No cover satisfying the selection filters exists within the tree."""


class BracketInvalid(NumericalError):
    """A root bracket does not exhibit the required sign change."""


class NotIrreducible(NumericalError):
    """The transition structure is reducible where irreducibility is required."""


class OutOfRange(NumericalError, ValueError):
    """An exponent lies outside the admissible range of a spectrum."""
