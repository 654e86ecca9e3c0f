"""Exception hierarchy shared across the toolkit."""


class AnnuitizeError(Exception):
    """Base class for all toolkit errors."""


class DomainError(AnnuitizeError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigError(AnnuitizeError):
    """Invalid or inconsistent configuration / parameters."""


class NumericalFailure(AnnuitizeError):
    """A numerical routine failed to reach its requested accuracy."""


class InvalidIntegrand(NumericalFailure):
    """An integrand or difference stencil produced a non-finite value."""


class BracketError(NumericalFailure):
    """Root bracket does not straddle a sign change."""


class NoConvergence(NumericalFailure):
    """Iteration limit reached before the tolerance was met."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class GridTooSmall(AnnuitizeError):
    """The stopping region is truncated by the grid upper bound."""


class NonConcave(AnnuitizeError):
    """Second derivative is not negative where strict concavity is required."""


class DegenerateMarginalValue(AnnuitizeError):
    """First derivative of the value function is not strictly positive."""


class IoError(AnnuitizeError):
    """File input/output failure."""
