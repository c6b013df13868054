"""Exception hierarchy shared by every module."""


class CauchyCharError(Exception):
    """Base class for all errors raised by :mod:`cauchychar`."""


class DomainError(CauchyCharError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateSampleError(DomainError):
    """The sample is a point mass (or otherwise too degenerate) for the request."""


class NumericalError(CauchyCharError, ArithmeticError):
    """A numerical procedure failed: non-convergence, vanishing denominators, etc."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class ConvergenceError(NumericalError):
    """An iterative or adaptive routine did not reach its tolerance."""


class EstimationError(NumericalError):
    """An estimator could not produce a usable estimate."""
