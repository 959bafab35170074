"""Exception hierarchy shared by all modules."""


class OUPriceError(Exception):
    """Base class for every error raised by this package."""


class DomainError(OUPriceError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigError(OUPriceError, ValueError):
    """A simulation or run configuration is invalid."""


class RangeError(OUPriceError, OverflowError):
    """The result would overflow double precision."""


class NumericalFailure(OUPriceError, ArithmeticError):
    """A numerical routine did not reach its accuracy target.

    ``error_estimate`` carries the achieved error when one is available.
    """

    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate


class EstimationError(OUPriceError, ValueError):
    """A parameter estimate does not describe a valid mean-reverting process."""
