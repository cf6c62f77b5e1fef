"""Exception types raised by arraygain."""


class ArrayGainError(Exception):
    """Base class for all package errors."""


class ValidationError(ArrayGainError, ValueError):
    """Invalid geometry, direction, pattern or configuration input."""


class PatternTableError(ValidationError):
    """Malformed gain-pattern table (CSV ingestion)."""


class ConfigError(ValidationError):
    """Invalid scenario configuration document."""


class DegenerateChannelError(ArrayGainError, ArithmeticError):
    """The channel Gram matrix is singular or too ill-conditioned for ZF.

    ``partial`` optionally carries results that are still well defined
    (e.g. MRC rates when only the ZF branch failed).
    """

    def __init__(self, message, condition=None, partial=None):
        super().__init__(message)
        self.condition = condition
        self.partial = partial
