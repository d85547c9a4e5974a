"""Probabilities that Gaussian triangles are obtuse (or acute)."""
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import densities
from .model import FamilySpec
from .montecarlo import DEFAULT_CHUNK, Estimate, estimate_probability
from .numerics import QuadConfig, QuadResult, Region, integrate_2d, rectangle
from .specfun import bessel_i, erf, goldstein_j

PI = math.pi
HALF_PI = 0.5 * PI
DEFAULT_N = 10 ** 6
QUAD_TOL = 1e-6
DISCREPANCY_SIGMAS = 5.0

_BASIS = {
    "1": 1.0,
    "1/pi": 1.0 / PI,
    "1/sqrt2": 1.0 / math.sqrt(2.0),
    "sqrt3/pi": math.sqrt(3.0) / PI,
}


@dataclass(frozen=True)
class ExactValue:
    """const + coef * basis with rational const and coef."""
    const: Fraction
    coef: Fraction = Fraction(0)
    basis: str = "1"

    def __post_init__(self):
        if self.basis not in _BASIS:
            raise ValueError(f"unknown basis {self.basis!r}")

    def __float__(self):
        return float(self.const) + float(self.coef) * _BASIS[self.basis]

    @property
    def expr(self):
        if self.coef == 0:
            return str(self.const)
        sign = "-" if self.coef < 0 else "+"
        mag = abs(self.coef)
        num, den = mag.numerator, mag.denominator
        if self.basis == "1/pi":
            term = f"{num}/({den} pi)" if den != 1 else f"{num}/pi"
        elif self.basis == "1/sqrt2":
            term = f"{num}/({den} sqrt2)" if den != 1 else f"{num}/sqrt2"
        elif self.basis == "sqrt3/pi":
            term = f"{num} sqrt3/({den} pi)"
        else:
            term = str(mag)
        head = "" if self.const == 0 else f"{self.const} "
        return f"{head}{sign} {term}".strip()


F = Fraction
PINNED_TABLE = {
    2: ExactValue(F(3, 2), F(-1), "1/sqrt2"),
    3: ExactValue(F(1), F(-1), "1/pi"),
    4: ExactValue(F(3, 2), F(-5, 4), "1/sqrt2"),
    5: ExactValue(F(1), F(-4, 3), "1/pi"),
    6: ExactValue(F(3, 2), F(-43, 32), "1/sqrt2"),
    7: ExactValue(F(1), F(-22, 15), "1/pi"),
    8: ExactValue(F(3, 2), F(-177, 128), "1/sqrt2"),
}
PURE_TABLE = {
    2: ExactValue(F(3, 4)),
    3: ExactValue(F(1), F(-3, 4), "sqrt3/pi"),
    4: ExactValue(F(17, 32)),
    5: ExactValue(F(1), F(-9, 8), "sqrt3/pi"),
    6: ExactValue(F(353, 512)),
    7: ExactValue(F(1), F(-27, 20), "sqrt3/pi"),
    8: ExactValue(F(867, 4096)),
}


@dataclass
class AcutenessReport:
    family: FamilySpec
    p_obtuse_mc: Estimate | None
    p_obtuse_closed: float | None = None
    p_obtuse_quad: QuadResult | None = None
    table_value: str | None = None
    table_float: float | None = None
    conjectured: bool = False
    table_discrepancy: bool = False
    prediction_discrepancy: bool = False
    consistent: bool = True
    tolerance: float = QUAD_TOL
    notes: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def p_acute_closed(self):
        return None if self.p_obtuse_closed is None else 1.0 - self.p_obtuse_closed


def _off_by(est, target, k):
    return est is not None and abs(est.value - target) > k * est.stderr


def _obtuse_mc(spec, n, seed, workers):
    if not n:
        return None
    return estimate_probability(spec, lambda t: t.obtuse, n, seed, DEFAULT_CHUNK, workers)


# ---------------------------------------------------------------------------
# quadrature over the obtuse region of the angle simplex

OBTUSE_REGIONS = (
    Region(HALF_PI, PI, 0.0, lambda x: PI - x),        # alpha > pi/2
    Region(0.0, HALF_PI, HALF_PI, lambda x: PI - x),   # beta > pi/2
    Region(0.0, HALF_PI, 0.0, lambda x: HALF_PI - x),  # gamma > pi/2
)
ACUTE_REGION = Region(0.0, HALF_PI, lambda x: HALF_PI - x, HALF_PI)


def obtuse_quadrature(density, cfg=QuadConfig(1e-10, 1e-10)):
    """Integral of an (alpha, beta) density over the three obtuse subregions.

    A triangle has at most one obtuse angle, so the pieces are disjoint.
    """
    parts = [integrate_2d(density, r, cfg) for r in OBTUSE_REGIONS]
    return QuadResult(math.fsum(p.value for p in parts), sum(p.err_est for p in parts),
                      sum(p.evaluations for p in parts))


def acute_quadrature(density, cfg=QuadConfig(1e-10, 1e-10)):
    return integrate_2d(density, ACUTE_REGION, cfg)


def _report(spec, mc, closed, quad, quad_tol=QUAD_TOL, **kw):
    ok = True
    tol = quad_tol
    if closed is not None and quad is not None:
        ok &= abs(closed - quad.value) <= quad_tol
    if closed is not None and mc is not None:
        tol = max(quad_tol, 3.0 * mc.stderr)
        ok &= abs(mc.value - closed) <= tol
    return AcutenessReport(spec, mc, closed, quad, consistent=bool(ok), tolerance=tol, **kw)


# ---------------------------------------------------------------------------
# pinned

def pinned_obtuse_closed():
    return 1.5 - 1.0 / math.sqrt(2.0)


def pinned_obtuse_via_cdf():
    """Two base angles contribute 1 - G(pi/2) each, the apex angle 1/2."""
    return 2.0 * (1.0 - densities.pinned_angle_cdf_G(HALF_PI)) + 0.5


def pinned_obtuse_2d(n_mc=DEFAULT_N, seed=0, cfg=QuadConfig(1e-10, 1e-10), workers=1):
    spec = FamilySpec("pinned", 2)
    quad = obtuse_quadrature(lambda x, y: densities.pinned_angles_ndim(2, x, y), cfg)
    rep = _report(spec, _obtuse_mc(spec, n_mc, seed, workers), pinned_obtuse_closed(), quad,
                  table_value=PINNED_TABLE[2].expr, table_float=float(PINNED_TABLE[2]))
    rep.extra["via_cdf"] = pinned_obtuse_via_cdf()
    return rep


def _ndim_report(family, table, density, name, n, n_mc, seed, cfg, workers):
    if n not in table:
        raise ValueError(f"n must be in {min(table)}..{max(table)}")
    spec = FamilySpec(family, n)
    exact = table[n]
    table_val = float(exact)
    quad = obtuse_quadrature(lambda x, y: density(n, x, y), cfg)
    mc = _obtuse_mc(spec, n_mc, seed, workers)
    conj = densities.is_conjectured(name, n)
    rep = AcutenessReport(spec, mc, None, quad, exact.expr, table_val, conj)
    rep.extra["quad_minus_table"] = quad.value - table_val
    rep.extra["normalization"] = integrate_2d(lambda x, y: density(n, x, y),
                                              Region(0.0, PI, 0.0, lambda x: PI - x), cfg).value
    rep.table_discrepancy = _off_by(mc, table_val, DISCREPANCY_SIGMAS)
    rep.prediction_discrepancy = _off_by(mc, quad.value, DISCREPANCY_SIGMAS)
    rep.tolerance = DISCREPANCY_SIGMAS * mc.stderr if mc is not None else QUAD_TOL
    rep.consistent = not (rep.table_discrepancy or rep.prediction_discrepancy)
    notes = []
    if abs(quad.value - table_val) > QUAD_TOL:
        notes.append(f"density predicts {quad.value:.10g}, table gives {table_val:.10g}")
    if rep.table_discrepancy:
        notes.append(f"MC {mc.value:.6g} +/- {mc.stderr:.2g} disagrees with the table")
    if rep.prediction_discrepancy:
        notes.append(f"MC {mc.value:.6g} +/- {mc.stderr:.2g} disagrees with the density")
    rep.notes = "; ".join(notes)
    return rep


def pinned_obtuse_ndim(n, n_mc=DEFAULT_N, seed=0, cfg=QuadConfig(1e-10, 1e-10), workers=1):
    """Pinned triangles in R^n: table value, conjectured-density quadrature, MC."""
    return _ndim_report("pinned", PINNED_TABLE, densities.pinned_angles_ndim, "pinned_angles_ndim",
                        n, n_mc, seed, cfg, workers)


def pure_obtuse_ndim(n, n_mc=DEFAULT_N, seed=0, cfg=QuadConfig(1e-10, 1e-10), workers=1):
    """Pure triangles in R^n: table value, conjectured-density quadrature, MC."""
    return _ndim_report("pure", PURE_TABLE, densities.pure_angles_ndim, "pure_angles_ndim",
                        n, n_mc, seed, cfg, workers)


# ---------------------------------------------------------------------------
# staked and anchored, c = 1
#
# The apex C is acute-making iff it lies in the vertical strip over the
# base and outside the disk with the base as diameter; the disk sits
# inside the strip, so P(acute) = P(strip) - P(disk).

_CENTER_SHIFT = {"staked": 0.5, "anchored": 0.0}


def _check_family(family):
    if family not in _CENTER_SHIFT:
        raise ValueError("family must be 'staked' or 'anchored'")
    return _CENTER_SHIFT[family]


def strip_probability(family="staked"):
    """P(apex above the base segment's x-range), c = 1."""
    _check_family(family)
    if family == "staked":
        return 0.5 * erf(1.0 / math.sqrt(2.0))
    return erf(1.0 / (2.0 * math.sqrt(2.0)))


def strip_probability_quad(family="staked", cfg=QuadConfig(1e-12, 1e-12)):
    # base midpoint at the origin after shifting the Gaussian mean; y >= 0 doubled
    s = _check_family(family)
    top = cfg.cutoff

    def f(x, y):
        return np.exp(-0.5 * ((x + s) ** 2 + y * y)) / PI

    return integrate_2d(f, rectangle(-0.5, 0.5, 0.0, top), cfg)


def circle_probability(family="staked"):
    """P(apex inside the disk on the base as diameter), c = 1."""
    _check_family(family)
    if family == "staked":
        return 0.5 * (1.0 - math.exp(-0.25) * bessel_i(0, 0.25))
    return 1.0 - math.exp(-0.125)


def circle_probability_goldstein(family="staked"):
    """exp(-s^2/2) J(s^2/2, 1/8) with s the distance from the mean to the disk center."""
    s = _check_family(family)
    return math.exp(-0.5 * s * s) * goldstein_j(0.5 * s * s, 0.125)


def circle_probability_quad(family="staked", cfg=QuadConfig(1e-12, 1e-12)):
    s = _check_family(family)

    def f(theta, r):
        return np.exp(-0.5 * (r * r + 2.0 * s * r * np.cos(theta) + s * s)) * r / (2.0 * PI)

    return integrate_2d(f, rectangle(0.0, 2.0 * PI, 0.0, 0.5), cfg)


def staked_acute_closed():
    return 0.5 * (-1.0 + erf(1.0 / math.sqrt(2.0)) + math.exp(-0.25) * bessel_i(0, 0.25))


def anchored_acute_closed():
    return -1.0 + math.exp(-0.125) + erf(1.0 / (2.0 * math.sqrt(2.0)))


def _fixed_c_obtuse(family, closed_acute, n_mc, seed, cfg, workers):
    spec = FamilySpec(family, 2, 1.0)
    dens = densities.staked_angles if family == "staked" else densities.anchored_angles
    acute = acute_quadrature(lambda x, y: dens(1.0, x, y), cfg)
    quad = QuadResult(1.0 - acute.value, acute.err_est, acute.evaluations)
    rep = _report(spec, _obtuse_mc(spec, n_mc, seed, workers), 1.0 - closed_acute, quad, quad_tol=1e-5)
    rep.extra["strip"] = strip_probability(family)
    rep.extra["circle"] = circle_probability(family)
    rep.extra["strip_minus_circle"] = rep.extra["strip"] - rep.extra["circle"]
    rep.extra["strip_quad"] = strip_probability_quad(family).value
    rep.extra["circle_quad"] = circle_probability_quad(family).value
    rep.extra["circle_goldstein"] = circle_probability_goldstein(family)
    return rep


def staked_obtuse(n_mc=DEFAULT_N, seed=0, cfg=QuadConfig(1e-10, 1e-10), workers=1):
    return _fixed_c_obtuse("staked", staked_acute_closed(), n_mc, seed, cfg, workers)


def anchored_obtuse(n_mc=DEFAULT_N, seed=0, cfg=QuadConfig(1e-10, 1e-10), workers=1):
    return _fixed_c_obtuse("anchored", anchored_acute_closed(), n_mc, seed, cfg, workers)
