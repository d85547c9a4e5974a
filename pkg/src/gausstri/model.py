"""Triangle value types, the Heron product and classification.

Labeling follows one fixed convention everywhere: side ``a`` is opposite
vertex A (angle alpha), ``b`` opposite B (beta), ``c`` opposite C (gamma).
For vertices (p1, p2, p3) = (A, B, C):

    a = |p2 - p3|,  b = |p1 - p3|,  c = |p1 - p2|.
"""
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTriangleError

DEGENERACY_RTOL = 1e-14
ANGLE_SUM_TOL = 1e-12

FAMILIES = ("pinned", "staked", "anchored", "pure")


def _margins(a, b, c):
    return (-a + b + c, a - b + c, a + b - c)


def is_degenerate(a, b, c):
    return min(_margins(a, b, c)) <= DEGENERACY_RTOL * max(a, b, c)


@dataclass(frozen=True)
class TriangleSides:
    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DegenerateTriangleError(f"side {name}={v!r} must be positive and finite")
        if not min(_margins(self.a, self.b, self.c)) > 0:
            raise DegenerateTriangleError(f"{self} violates the triangle inequality")


@dataclass(frozen=True)
class TriangleAngles:
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not 0 < v < math.pi:
                raise ValueError(f"angle {name}={v!r} outside (0, pi)")
        if abs(self.alpha + self.beta + self.gamma - math.pi) > ANGLE_SUM_TOL:
            raise ValueError("angles must sum to pi")

    def __iter__(self):
        return iter((self.alpha, self.beta, self.gamma))


@dataclass(frozen=True)
class FamilySpec:
    """Which random triangle: family, ambient dimension and base length c.

    ``c`` only matters for the staked and anchored families.
    """
    family: str = "pinned"
    dim: int = 2
    c: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError("dim must be an integer >= 2")
        if not (math.isfinite(self.c) and self.c > 0):
            raise ValueError("c must be positive")


class Shape(str, enum.Enum):
    ACUTE = "acute"
    RIGHT = "right"
    OBTUSE = "obtuse"


def delta(sides):
    """Heron product (a+b+c)(-a+b+c)(a-b+c)(a+b-c) = 16 area^2."""
    a, b, c = sides.a, sides.b, sides.c
    return (a + b + c) * (-a + b + c) * (a - b + c) * (a + b - c)


def _half_angle(per, m_opp, m1, m2):
    # tan(angle/2) = sqrt(m1 m2 / (perimeter * m_opp)), m_x the triangle-inequality margins
    return 2.0 * math.atan2(math.sqrt(m1 * m2), math.sqrt(per * m_opp))


def angles_from_sides(sides):
    """Interior angles by the half-angle form of the Law of Cosines.

    The three margins are computed once and shared, so the angles sum to pi
    to rounding even for needle triangles.
    """
    a, b, c = sides.a, sides.b, sides.c
    m1, m2, m3 = _margins(a, b, c)
    per = a + b + c
    return TriangleAngles(_half_angle(per, m1, m2, m3), _half_angle(per, m2, m3, m1),
                          _half_angle(per, m3, m1, m2))


def sides_from_vertices(p1, p2, p3):
    p1, p2, p3 = (np.asarray(p, dtype=float) for p in (p1, p2, p3))
    if not (p1.shape == p2.shape == p3.shape) or p1.ndim != 1 or p1.size < 2:
        raise ValueError("points must share one dimension >= 2")
    a = float(np.linalg.norm(p2 - p3))
    b = float(np.linalg.norm(p1 - p3))
    c = float(np.linalg.norm(p1 - p2))
    if min(a, b, c) == 0 or is_degenerate(a, b, c):
        raise DegenerateTriangleError("points are coincident or collinear")
    return TriangleSides(a, b, c)


def classify(angles):
    """Acute / right / obtuse by exact comparison of the largest angle with pi/2."""
    top = max(angles.alpha, angles.beta, angles.gamma)
    if top > math.pi / 2:
        return Shape.OBTUSE
    if top == math.pi / 2:
        return Shape.RIGHT
    return Shape.ACUTE


def angles_from_side_arrays(a, b, c):
    """Vectorized :func:`angles_from_sides` without validation."""
    a, b, c = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c)))
    m1 = np.maximum(-a + b + c, 0.0)
    m2 = np.maximum(a - b + c, 0.0)
    m3 = np.maximum(a + b - c, 0.0)
    per = a + b + c
    alpha = 2.0 * np.arctan2(np.sqrt(m2 * m3), np.sqrt(per * m1))
    beta = 2.0 * np.arctan2(np.sqrt(m3 * m1), np.sqrt(per * m2))
    gamma = 2.0 * np.arctan2(np.sqrt(m1 * m2), np.sqrt(per * m3))
    return alpha, beta, gamma
