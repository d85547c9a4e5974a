"""Closed-form densities for Gaussian triangles.

All functions broadcast over numpy arrays, return exactly 0 off their
support and raise DomainError on non-finite input or negative lengths.
Angle arguments are (x, y) = (alpha, beta); side arguments are
(x, y) = (a, b), or (x, y, z) = (a, b, c) for the pinned trivariate law.

The staked and anchored angle densities carry the constant c^2/pi: the
pushforward of the apex density through (u, v) -> (alpha, beta) gives
c^2/(2 pi), and the mirror image v -> -v produces the same angles, which
doubles it.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConvergenceError, DomainError
from .specfun import bessel_i_scaled

# densities whose normalization for general n is a hypothesis, not a theorem
CONJECTURED = {
    "pinned_angles_ndim": lambda n: n >= 3,
    "pure_angles_ndim": lambda n: n >= 3,
}


def is_conjectured(name, n=2):
    rule = CONJECTURED.get(name)
    return bool(rule and rule(n))


def _lengths(*args):
    arrs = [np.asarray(v, dtype=float) for v in args]
    for v in arrs:
        if not np.all(np.isfinite(v)):
            raise DomainError("lengths must be finite")
        if np.any(v < 0):
            raise DomainError("lengths must be non-negative")
    return np.broadcast_arrays(*arrs)


def _angles(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise DomainError("angles must be finite")
    x, y = np.broadcast_arrays(x, y)
    inside = (x > 0) & (y > 0) & (x + y < math.pi)
    return x, y, inside


def _out(val, like):
    return float(val) if np.ndim(like) == 0 else val


def heron(x, y, z):
    return (x + y + z) * (-x + y + z) * (x - y + z) * (x + y - z)


# ---------------------------------------------------------------------------
# pinned triangles

def pinned_sides3(x, y, z):
    """Joint density of (a, b, c) for the planar pinned triangle."""
    x, y, z = _lengths(x, y, z)
    inside = (np.abs(x - y) < z) & (z < x + y)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (2.0 / math.pi) * x * y * z / np.sqrt(heron(x, y, z)) * np.exp(-0.5 * (x * x + y * y))
    return _out(np.where(inside, val, 0.0), x)


def pinned_side_marginal(which, x):
    """Rayleigh laws of a, b (scale 1) and of c (scale sqrt 2)."""
    (x,) = _lengths(x)
    if which in ("a", "b"):
        val = x * np.exp(-0.5 * x * x)
    elif which == "c":
        val = 0.5 * x * np.exp(-0.25 * x * x)
    else:
        raise ValueError("which must be 'a', 'b' or 'c'")
    return _out(np.where(x > 0, val, 0.0), x)


def pinned_angle_constant(n):
    return (n - 1) * 2.0 ** (n - 1) / math.pi


def pinned_angles_ndim(n, x, y):
    """Bivariate (alpha, beta) density for pinned triangles in R^n.

    Proven for n = 2; for n >= 3 this is the conjectured form and is
    flagged in ``CONJECTURED``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    x, y, inside = _angles(x, y)
    sx, sy, sxy = np.sin(x), np.sin(y), np.sin(x + y)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = pinned_angle_constant(n) * (sx * sy * sxy) ** (n - 1) / (sx * sx + sy * sy) ** n
    return _out(np.where(inside, val, 0.0), x)


def pinned_angle_marginal_g(x):
    """Marginal density g of alpha for the planar pinned triangle."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("angle must be finite")
    cx = np.cos(x)
    w = 2.0 - cx * cx
    val = (cx / w ** 1.5 * (0.5 * math.pi + np.arcsin(cx / math.sqrt(2.0))) + 1.0 / w) / math.pi
    return _out(np.where((x > 0) & (x < math.pi), val, 0.0), x)


def pinned_angle_cdf_G(x):
    """CDF G of alpha, clamped to 0 below the support and 1 above."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("angle must be finite")
    cx = np.cos(x)
    val = (np.sin(x) / np.sqrt(2.0 - cx * cx) * (0.5 * math.pi + np.arcsin(cx / math.sqrt(2.0))) + x) / math.pi
    val = np.where(x <= 0, 0.0, np.where(x >= math.pi, 1.0, val))
    return _out(val, x)


# ---------------------------------------------------------------------------
# staked and anchored triangles

def staked_angles(c, x, y):
    x, y, inside = _angles(x, y)
    sx, sy, sxy = np.sin(x), np.sin(y), np.sin(x + y)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = sx / sxy
        val = (c * c / math.pi) * np.exp(-0.5 * c * c * ratio * ratio) * sx * sy / sxy ** 3
    return _out(np.where(inside, val, 0.0), x)


def anchored_angles(c, x, y):
    x, y, inside = _angles(x, y)
    sx, sy, sxy = np.sin(x), np.sin(y), np.sin(x + y)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        expo = (np.sin(x - y) ** 2 + 4.0 * sx * sx * sy * sy) / (sxy * sxy)
        val = (c * c / math.pi) * np.exp(-0.125 * c * c * expo) * sx * sy / sxy ** 3
    return _out(np.where(inside, val, 0.0), x)


def _fixed_c_support(c, x, y):
    return (np.abs(x - y) < c) & (c < x + y)


def staked_sides(c, x, y):
    """Joint density of (a, b) for the staked triangle with base c."""
    x, y = _lengths(x, y)
    inside = _fixed_c_support(c, x, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (2.0 / math.pi) * x * y / np.sqrt(heron(x, y, c)) * np.exp(-0.5 * x * x)
    return _out(np.where(inside, val, 0.0), x)


def anchored_sides(c, x, y):
    """Joint density of (a, b) for the anchored triangle with base c."""
    x, y = _lengths(x, y)
    inside = _fixed_c_support(c, x, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (2.0 * math.exp(c * c / 8.0) / math.pi) * x * y / np.sqrt(heron(x, y, c)) \
            * np.exp(-0.25 * (x * x + y * y))
    return _out(np.where(inside, val, 0.0), x)


def rice_pdf(x, nu, sigma=1.0):
    """Rice density (x/s^2) exp(-(x^2+nu^2)/(2 s^2)) I0(x nu/s^2), evaluated scaled."""
    (x,) = _lengths(x)
    s2 = sigma * sigma
    arg = x * nu / s2
    val = x / s2 * np.exp(-0.5 * (x - nu) ** 2 / s2) * bessel_i_scaled(0, arg)
    return _out(np.where(x > 0, val, 0.0), x)


def staked_side_b_marginal(x):
    """Density of b for c = 1: Rice with nu = 1, sigma = 1."""
    return rice_pdf(x, 1.0)


def anchored_side_marginal(x):
    """Density of a (or b) for c = 1: Rice with nu = 1/2, sigma = 1."""
    return rice_pdf(x, 0.5)


# vertex maps used to derive the angle densities; kept for cross-checks

def staked_apex(c, alpha, beta):
    ta, tb = np.tan(alpha), np.tan(beta)
    return c * ta / (ta + tb), c * ta * tb / (ta + tb)


def staked_jacobian(c, u, v):
    """|d(alpha, beta)/d(u, v)| for A = (c, 0), B = (0, 0), C = (u, v)."""
    return np.abs(c * v / ((u * u + v * v) * ((c - u) ** 2 + v * v)))


def anchored_apex(c, alpha, beta):
    ta, tb = np.tan(alpha), np.tan(beta)
    return 0.5 * c * (ta - tb) / (ta + tb), c * ta * tb / (ta + tb)


def anchored_jacobian(c, u, v):
    """|d(alpha, beta)/d(u, v)| for A = (c/2, 0), B = (-c/2, 0), C = (u, v)."""
    return np.abs(16.0 * c * v / (((c - 2 * u) ** 2 + 4 * v * v) * ((c + 2 * u) ** 2 + 4 * v * v)))


def angle_density_via_apex(family, c, alpha, beta):
    """Angle density as 2 phi(u, v) / |J| with the apex recovered from the angles."""
    if family == "staked":
        u, v = staked_apex(c, alpha, beta)
        jac = staked_jacobian(c, u, v)
    elif family == "anchored":
        u, v = anchored_apex(c, alpha, beta)
        jac = anchored_jacobian(c, u, v)
    else:
        raise ValueError("family must be 'staked' or 'anchored'")
    phi = np.exp(-0.5 * (u * u + v * v)) / (2.0 * math.pi)
    return 2.0 * phi / jac


def side_density_via_angles(angle_density, c, x, y):
    """Push an angle density through (alpha, beta) -> (a, b) at fixed c.

    The map has Jacobian a b, so f_sides(a, b) = f_angles(alpha, beta) / (a b).
    """
    x, y = _lengths(x, y)
    inside = _fixed_c_support(c, x, y)
    m1 = np.where(inside, -x + y + c, 1.0)
    m2 = np.where(inside, x - y + c, 1.0)
    m3 = np.where(inside, x + y - c, 1.0)
    per = x + y + c
    alpha = 2.0 * np.arctan2(np.sqrt(m2 * m3), np.sqrt(per * m1))
    beta = 2.0 * np.arctan2(np.sqrt(m3 * m1), np.sqrt(per * m2))
    with np.errstate(divide="ignore", invalid="ignore"):
        val = angle_density(alpha, beta) / (x * y)
    return _out(np.where(inside, val, 0.0), x)


# ---------------------------------------------------------------------------
# pure triangles

def pure_angle_constant(n):
    return (n - 1) * 2.0 ** (n - 1) * 3.0 ** (0.5 * n) / math.pi


def pure_angles_ndim(n, x, y):
    """Conjectured bivariate (alpha, beta) density for pure triangles in R^n."""
    if n < 2:
        raise ValueError("n must be >= 2")
    x, y, inside = _angles(x, y)
    sx, sy, sxy = np.sin(x), np.sin(y), np.sin(x + y)
    val = pure_angle_constant(n) * (sx * sy * sxy) ** (n - 1) / (sx * sx + sy * sy + sxy * sxy) ** n
    return _out(np.where(inside, val, 0.0), x)


# ---------------------------------------------------------------------------
# correlated bivariate Rice

VARIANTS = ("same_center", "opposite_center")


@dataclass(frozen=True)
class CorrRiceParams:
    """rho: correlation of the two Gaussian pairs; k_max: series term cap."""
    rho: float
    k_max: int = 500
    abs_tol: float = 1e-14
    cancel_limit: float = 1e6

    def __post_init__(self):
        if not -1.0 < self.rho < 1.0:
            raise DomainError("need |rho| < 1")
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")

    def omega(self, variant):
        d = 1.0 - self.rho if variant == "opposite_center" else 1.0 + self.rho
        return math.exp(-1.0 / (4.0 * d)) / (1.0 - self.rho ** 2)


def corr_rice_density(params, variant, a, b, fallback=False):
    """Joint density of distances of two rho-correlated planar Gaussian
    points from (1/2, 0) each ("same_center"), or from (-1/2, 0) and
    (1/2, 0) ("opposite_center"), by its epsilon-weighted Bessel series.

    Raises ConvergenceError when the series does not settle within
    ``k_max`` terms or when alternating terms cancel beyond
    ``cancel_limit`` (opposite_center as rho -> 1). With ``fallback`` those
    points are evaluated by :func:`corr_rice_density_angular` instead.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    a_arr, b_arr = _lengths(a, b)
    vals, status = kernels.corr_rice_kernel(a_arr, b_arr, params.rho, variant == "opposite_center",
                                            params.abs_tol, params.k_max, params.cancel_limit)
    failed = status != kernels.OK
    if fallback and np.any(failed):
        vals[failed] = corr_rice_density_angular(params.rho, variant, a_arr.ravel()[failed],
                                                 b_arr.ravel()[failed])
        failed[:] = False
    if np.any(failed):
        bad = int(np.count_nonzero(status != kernels.OK))
        kind = "cancellation" if np.any(status == kernels.CANCELLED) else "truncation"
        raise ConvergenceError(f"correlated Rice series failed ({kind}) at {bad} point(s)",
                               vals.reshape(a_arr.shape))
    return _out(vals.reshape(a_arr.shape), a_arr)


def corr_rice_density_angular(rho, variant, a, b, rtol=1e-13, max_points=1 << 16):
    """Same law as :func:`corr_rice_density` from its angular integral.

    Integrating the 4-dimensional Gaussian over the angle of the first
    point gives 2 pi I0(...), leaving one periodic integral over the angle
    of the second point, done with the trapezoid rule (doubled to ``rtol``).
    """
    if not -1.0 < rho < 1.0:
        raise DomainError("need |rho| < 1")
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    a_arr, b_arr = _lengths(a, b)
    a_f = a_arr.reshape(-1, 1)
    b_f = b_arr.reshape(-1, 1)
    s1 = -0.5 if variant == "opposite_center" else 0.5
    one_m = 1.0 - rho * rho

    def trap(m):
        phi = 2.0 * math.pi * np.arange(m) / m
        z = 0.5 + b_f * np.cos(phi)
        w = b_f * np.sin(phi)
        q0 = (s1 * s1 + a_f * a_f + z * z + w * w - 2.0 * rho * s1 * z) / (2.0 * one_m)
        arg = a_f * np.sqrt((s1 - rho * z) ** 2 + (rho * w) ** 2) / one_m
        vals = np.exp(arg - q0) * bessel_i_scaled(0, arg)
        return vals.mean(axis=1) * 2.0 * math.pi

    m = 64
    prev = trap(m)
    while True:
        m *= 2
        cur = trap(m)
        if np.all(np.abs(cur - prev) <= rtol * np.abs(cur)) or m >= max_points:
            break
        prev = cur
    val = (a_f * b_f).ravel() * cur / (2.0 * math.pi * one_m)
    return _out(val.reshape(a_arr.shape), a_arr)
