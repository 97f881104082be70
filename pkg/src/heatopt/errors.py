"""Exception types shared across the toolkit."""


class MeasureZeroBoundaryError(ValueError):
    """A boundary portion that must have positive length is empty (or covers everything)."""


class SolverFailure(RuntimeError):
    """Iterative linear solve did not reach the requested tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class EigenFailure(RuntimeError):
    """Eigenvalue iteration broke down or did not converge."""


class OcpFailure(RuntimeError):
    """Optimal-control iteration hit its cap before reaching the tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class NoContractionError(RuntimeError):
    """Fixed-point iteration diverged; the operator is not contracting for this data."""
