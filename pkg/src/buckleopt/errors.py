"""Exception types raised across the package."""


class InvalidDomainError(ValueError):
    """A domain description violates its invariants."""


class DegenerateDomainError(InvalidDomainError):
    """A domain (or a derived hull) has zero area."""


class ResolutionTooCoarseError(ValueError):
    """Rasterization produced no interior unknowns."""


class SolverFailureError(RuntimeError):
    """The eigensolver did not reach the requested residual.

    Attributes
    ----------
    residuals : ndarray
        Best relative residuals reached before giving up.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals
