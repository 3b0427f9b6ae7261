"""Exception types shared by the numerical modules."""


class IsoSobolevError(Exception):
    """Base class for all package errors."""


class DomainError(IsoSobolevError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class DivergenceError(IsoSobolevError, ArithmeticError):
    """An integral or supremum is infinite."""


class AccuracyError(IsoSobolevError, ArithmeticError):
    """Adaptive refinement did not reach the requested tolerance.

    The best available estimate is kept on ``partial_value``.
    """

    def __init__(self, message, partial_value=None, error_estimate=None):
        super().__init__(message)
        self.partial_value = partial_value
        self.error_estimate = error_estimate


class EvaluationError(IsoSobolevError, ArithmeticError):
    """An objective or integrand returned a non-finite value."""
