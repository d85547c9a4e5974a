"""Random triangles with Gaussian vertices: samplers, densities, moments and
obtuseness probabilities, each checked three ways (closed form, quadrature,
Monte Carlo)."""
from .errors import ConvergenceError, DegenerateTriangleError, DomainError
from .model import FamilySpec, Shape, TriangleAngles, TriangleSides, angles_from_sides, classify
from .montecarlo import Estimate, estimate_moment, estimate_probability, histogram_gof
from .numerics import QuadConfig, QuadResult
from .samplers import RngStream, sample_anchored, sample_family, sample_pinned, sample_pure, sample_staked

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError", "DegenerateTriangleError", "DomainError",
    "FamilySpec", "Shape", "TriangleAngles", "TriangleSides", "angles_from_sides", "classify",
    "Estimate", "estimate_moment", "estimate_probability", "histogram_gof",
    "QuadConfig", "QuadResult",
    "RngStream", "sample_anchored", "sample_family", "sample_pinned", "sample_pure", "sample_staked",
]
