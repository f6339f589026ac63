"""Exception types shared across the library."""


class ExtSobolevError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(ExtSobolevError, ValueError):
    """An argument violates a documented precondition."""


class UnsupportedSectorError(InvalidArgumentError):
    """An angular-momentum sector outside the supported range was requested."""


class NonConvergenceError(ExtSobolevError, RuntimeError):
    """A quadrature or series did not converge within its budget.

    Carries the best estimate obtained so far so callers can decide
    whether to proceed anyway.
    """

    def __init__(self, message, best_estimate=None, error_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


class DivergenceDetected(ExtSobolevError, RuntimeError):
    """Partial integrals fail the Cauchy criterion; quantitative certificate attached."""

    def __init__(self, message, growth_exponent=None, partials=None):
        super().__init__(message)
        self.growth_exponent = growth_exponent
        self.partials = partials
