"""Exception hierarchy shared by all modules."""


class HapnetError(Exception):
    """Base class for every error raised by :mod:`hapnet`."""


class DomainError(HapnetError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DegenerateParametrizationError(HapnetError, ValueError):
    """The Gram determinant of a chart is not positive where it must be."""


class CapabilityError(HapnetError, NotImplementedError):
    """The request is valid but outside what is implemented."""


class NumericalError(HapnetError, ArithmeticError):
    """A numerical routine failed or produced an out-of-range value."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConfigError(HapnetError, ValueError):
    """A configuration key or value is invalid."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class InfeasibleError(HapnetError):
    """No candidate satisfies the requested constraint."""
