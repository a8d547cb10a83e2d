"""Clamped-plate buckling eigenvalues and perimeter-constrained shape optimization."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DegenerateDomainError,
    InvalidDomainError,
    ResolutionTooCoarseError,
    SolverFailureError,
)
from .geometry import Disk, Polygon, Rectangle, StarShape  # noqa: E402
from .estimators import BucklingEigenvalues, PerimeterConstrainedOptimizer  # noqa: E402

__all__ = [
    "BucklingEigenvalues",
    "DegenerateDomainError",
    "Disk",
    "InvalidDomainError",
    "PerimeterConstrainedOptimizer",
    "Polygon",
    "Rectangle",
    "ResolutionTooCoarseError",
    "SolverFailureError",
    "StarShape",
]
