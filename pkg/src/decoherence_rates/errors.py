"""Exception types raised across the toolkit."""


class InvalidDimensionError(ValueError):
    pass


class UnsupportedDimensionError(InvalidDimensionError):
    """A routine that only exists for particular dimensions was called with another."""


class ShapeError(ValueError):
    pass


class DomainError(ValueError):
    """A parameter lies outside the domain where the object is defined."""


class ChannelValidityError(DomainError):
    """The supplied coefficients do not describe a completely positive channel."""


class StateValidityError(ValueError):
    pass


class BracketError(ValueError):
    pass


class SingularConfigurationError(ValueError):
    """The probe makes the estimation formula's denominator vanish."""


class InconsistentDataError(ValueError):
    pass


class OutOfRangeError(ValueError):
    """Raised when an estimate sits on (or beyond) the edge of its inversion range.

    ``boundary`` names the limiting result when the input is exactly on the edge,
    e.g. ``"gamma=inf"`` for a rate of one.
    """

    def __init__(self, message, boundary=None):
        super().__init__(message)
        self.boundary = boundary


class ConfigError(ValueError):
    pass
