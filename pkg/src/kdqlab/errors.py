"""Exception hierarchy shared by all kdqlab modules."""


class KdqError(Exception):
    """Base class for every error raised by kdqlab."""


class NotHermitian(KdqError):
    pass


class NonFinite(KdqError):
    pass


class DimensionMismatch(KdqError):
    pass


class InvalidP(KdqError):
    pass


class InvalidVariant(KdqError):
    pass


class InvalidPulse(KdqError):
    pass


class GridTooSmall(KdqError):
    pass


class NonUniformGrid(KdqError):
    pass


class WOutOfRange(KdqError):
    pass


class LengthMismatch(KdqError):
    pass


class NonPositiveSigma(KdqError):
    pass


class InvariantViolation(KdqError):
    """A numerical invariant (unitarity, normalization, ...) drifted past tolerance."""


class ConfigError(KdqError):
    pass


class ParseError(ConfigError):
    def __init__(self, message, line=None, key=None):
        super().__init__(message)
        self.line = line
        self.key = key


class ValidationError(ConfigError):
    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
