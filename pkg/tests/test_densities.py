import math

import numpy as np
import pytest
import scipy.integrate as si
import scipy.special as sp
import scipy.stats as ss
from hypothesis import given, settings, strategies as st

from gausstri import densities as dn
from gausstri import suite
from gausstri.errors import ConvergenceError, DomainError
from gausstri.model import FamilySpec
from gausstri.montecarlo import histogram_gof
from gausstri.numerics import ANGLE_SIMPLEX, QuadConfig, integrate_1d, integrate_2d, rectangle

PI = math.pi
CFG = QuadConfig(1e-9, 1e-9)

ANGLE_LAWS = {
    "pinned2": lambda x, y: dn.pinned_angles_ndim(2, x, y),
    "pinned5": lambda x, y: dn.pinned_angles_ndim(5, x, y),
    "staked": lambda x, y: dn.staked_angles(1.0, x, y),
    "staked_c2": lambda x, y: dn.staked_angles(2.0, x, y),
    "anchored": lambda x, y: dn.anchored_angles(1.0, x, y),
    "pure3": lambda x, y: dn.pure_angles_ndim(3, x, y),
}
SIDE_LAWS = {
    "staked": lambda x, y: dn.staked_sides(1.0, x, y),
    "anchored": lambda x, y: dn.anchored_sides(1.0, x, y),
    "pinned_ab_at_c1": lambda x, y: dn.pinned_sides3(x, y, 1.0),
    "corr_rice": lambda x, y: dn.corr_rice_density(dn.CorrRiceParams(0.5), "same_center", x, y),
}


class TestSupportAndSign:
    @pytest.mark.parametrize("name", sorted(ANGLE_LAWS))
    def test_angle_laws(self, name):
        rng = np.random.default_rng(0)
        x = rng.uniform(-1, 4, 10 ** 4)
        y = rng.uniform(-1, 4, 10 ** 4)
        v = np.asarray(ANGLE_LAWS[name](x, y))
        inside = (x > 0) & (y > 0) & (x + y < PI)
        assert np.all(v[inside] >= 0) and np.all(np.isfinite(v))
        assert np.all(v[~inside] == 0)

    @pytest.mark.parametrize("name", sorted(SIDE_LAWS))
    def test_side_laws(self, name):
        rng = np.random.default_rng(1)
        x = rng.uniform(0, 5, 10 ** 4)
        y = rng.uniform(0, 5, 10 ** 4)
        v = np.asarray(SIDE_LAWS[name](x, y))
        assert np.all(v >= 0) and np.all(np.isfinite(v))
        if name != "corr_rice":
            c = 1.0
            off = ~((np.abs(x - y) < c) & (c < x + y))
            assert np.all(v[off] == 0)

    def test_bad_inputs(self):
        with pytest.raises(DomainError):
            dn.staked_sides(1.0, -1.0, 1.0)
        with pytest.raises(DomainError):
            dn.pinned_sides3(1.0, math.nan, 1.0)
        with pytest.raises(DomainError):
            dn.staked_angles(1.0, math.inf, 0.1)
        with pytest.raises(DomainError):
            dn.CorrRiceParams(1.0)


class TestPinned:
    def test_outside_triangle_inequality(self):
        assert dn.pinned_sides3(1, 1, 3) == 0.0

    def test_z_integral_is_product_of_rayleighs(self):
        lo, hi = 0.0, 2.0
        got = dn.pinned_sides3(1.0, 1.0, 1.0)
        assert got > 0
        h = lambda z: dn.pinned_sides3(np.ones_like(z), np.ones_like(z), z) * np.sqrt(z * (2 - z))
        from gausstri.numerics import integrate_sqrt_singular
        mass = integrate_sqrt_singular(h, lo, hi, QuadConfig(1e-13, 1e-13)).value
        assert mass == pytest.approx(math.exp(-1.0), abs=1e-12)

    def test_trivariate_mass(self):
        assert suite.pinned_sides_mass() == pytest.approx(1.0, abs=1e-6)

    def test_side_marginals(self):
        assert dn.pinned_side_marginal("a", 1.0) == pytest.approx(math.exp(-0.5), abs=1e-15)
        for which, msq in (("a", 2.0), ("c", 4.0)):
            f = lambda x: dn.pinned_side_marginal(which, x)
            assert integrate_1d(f, 0, 40, CFG).value == pytest.approx(1.0, abs=1e-9)
            assert integrate_1d(lambda x: x * x * f(x), 0, 40, CFG).value == pytest.approx(msq, abs=1e-8)
        assert dn.pinned_side_marginal("b", 1.3) == dn.pinned_side_marginal("a", 1.3)
        with pytest.raises(ValueError):
            dn.pinned_side_marginal("gamma", 1.0)

    def test_angles_equilateral(self):
        assert dn.pinned_angles_ndim(2, PI / 3, PI / 3) == pytest.approx(math.sqrt(3) / (3 * PI), rel=1e-14)

    @given(st.floats(0.01, 3.1), st.floats(0.01, 0.99))
    def test_planar_formula(self, x, t):
        y = (PI - x) * t
        sx, sy, sxy = math.sin(x), math.sin(y), math.sin(x + y)
        ref = 2 / PI * sx * sy * sxy / (sx * sx + sy * sy) ** 2
        assert dn.pinned_angles_ndim(2, x, y) == pytest.approx(ref, rel=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4, 6])
    def test_boundary_zero(self, n):
        assert dn.pinned_angles_ndim(n, 1.0, PI - 1.0) == 0.0
        assert dn.pinned_angles_ndim(n, 2.0, 2.0) == 0.0

    @pytest.mark.parametrize("n", [2, 3])
    def test_normalization(self, n):
        r = integrate_2d(lambda x, y: dn.pinned_angles_ndim(n, x, y), ANGLE_SIMPLEX, CFG)
        assert r.value == pytest.approx(1.0, abs=1e-6)

    def test_conjecture_flags(self):
        assert not dn.is_conjectured("pinned_angles_ndim", 2)
        assert dn.is_conjectured("pinned_angles_ndim", 3)
        assert dn.is_conjectured("pure_angles_ndim", 4)

    def test_g_values(self):
        assert dn.pinned_angle_marginal_g(PI / 2) == pytest.approx(1 / (2 * PI), rel=1e-15)
        x = 0.7
        direct = integrate_1d(lambda y: dn.pinned_angles_ndim(2, x, y), 0, PI - x, QuadConfig(1e-12, 1e-12)).value
        assert dn.pinned_angle_marginal_g(x) == pytest.approx(direct, abs=1e-10)

    def test_G_values(self):
        assert dn.pinned_angle_cdf_G(0.0) == pytest.approx(0.0, abs=1e-15)
        assert dn.pinned_angle_cdf_G(PI) == pytest.approx(1.0, abs=1e-15)
        assert dn.pinned_angle_cdf_G(PI / 2) == pytest.approx(0.5 + 1 / (2 * math.sqrt(2)), abs=1e-15)

    def test_G_derivative_is_g(self):
        h = 1e-5
        for x in np.linspace(0.1, PI - 0.1, 20):
            fd = (dn.pinned_angle_cdf_G(x + h) - dn.pinned_angle_cdf_G(x - h)) / (2 * h)
            assert fd == pytest.approx(dn.pinned_angle_marginal_g(x), abs=1e-6)

    def test_angle_gof(self):
        res = histogram_gof(FamilySpec("pinned", 2), "angles2d", lambda x, y: dn.pinned_angles_ndim(2, x, y),
                            10, 10 ** 5, seed=31)
        assert res.p_value > 1e-3

    def test_apex_angle_uniform(self):
        from gausstri.samplers import RngStream, sample_pinned
        g = sample_pinned(2, RngStream(32), 10 ** 5).gamma
        assert ss.kstest(g, "uniform", args=(0, PI)).pvalue > 1e-3


class TestStaked:
    def test_equilateral(self):
        ref = math.exp(-0.5) * 2 / math.sqrt(3) / PI
        assert dn.staked_angles(1.0, PI / 3, PI / 3) == pytest.approx(ref, rel=1e-14)

    def test_asymmetric(self):
        assert dn.staked_angles(1.0, 1.0, 0.3) != pytest.approx(dn.staked_angles(1.0, 0.3, 1.0))

    @pytest.mark.parametrize("c", [0.5, 1.0, 2.5])
    def test_normalization(self, c):
        r = integrate_2d(lambda x, y: dn.staked_angles(c, x, y), ANGLE_SIMPLEX, CFG)
        assert r.value == pytest.approx(1.0, abs=1e-6)

    def test_sides_support(self):
        assert dn.staked_sides(1.0, 0.2, 0.3) == 0.0

    def test_sides_mass(self):
        assert suite.side_density_mass(dn.staked_sides, 1.0) == pytest.approx(1.0, abs=1e-6)

    def test_b_marginal_from_joint(self):
        from gausstri.numerics import integrate_sqrt_singular
        for y in np.linspace(0.2, 4.0, 10):
            lo, hi = abs(y - 1), y + 1
            h = lambda x: dn.staked_sides(1.0, x, np.full_like(x, y)) * np.sqrt((x - lo) * (hi - x))
            got = integrate_sqrt_singular(h, lo, hi, QuadConfig(1e-12, 1e-12)).value
            assert got == pytest.approx(dn.staked_side_b_marginal(y), abs=1e-10)

    def test_b_marginal(self):
        assert dn.staked_side_b_marginal(0.0) == 0.0
        x = np.linspace(0, 8, 50)
        assert np.allclose(dn.staked_side_b_marginal(x), ss.rice(1.0).pdf(x), rtol=1e-13, atol=1e-300)
        m = integrate_1d(lambda x: x * dn.staked_side_b_marginal(x), 0, 40, QuadConfig(1e-12, 1e-12)).value
        assert m == pytest.approx(1.5485724605511453806, abs=1e-10)
        m2 = integrate_1d(lambda x: x * x * dn.staked_side_b_marginal(x), 0, 40, QuadConfig(1e-12, 1e-12)).value
        assert m2 == pytest.approx(3.0, abs=1e-10)


class TestAnchored:
    @given(st.floats(0.01, 3.1), st.floats(0.01, 0.99))
    def test_symmetric(self, x, t):
        y = (PI - x) * t
        assert dn.anchored_angles(1.0, x, y) == pytest.approx(dn.anchored_angles(1.0, y, x), rel=1e-13)

    @given(st.floats(0.05, 1.5))
    def test_diagonal_exponent(self, a):
        c = 1.3
        ref = c * c / PI * math.exp(-c * c / 2 * math.sin(a) ** 4 / math.sin(2 * a) ** 2) \
            * math.sin(a) ** 2 / abs(math.sin(2 * a)) ** 3
        assert dn.anchored_angles(c, a, a) == pytest.approx(ref, rel=1e-12)

    def test_normalization(self):
        r = integrate_2d(lambda x, y: dn.anchored_angles(1.0, x, y), ANGLE_SIMPLEX, CFG)
        assert r.value == pytest.approx(1.0, abs=1e-6)

    def test_sides_symmetric_and_mass(self):
        rng = np.random.default_rng(3)
        x = rng.uniform(0, 4, 500)
        y = rng.uniform(0, 4, 500)
        assert np.allclose(dn.anchored_sides(1.0, x, y), dn.anchored_sides(1.0, y, x), rtol=1e-14, atol=0)
        assert suite.side_density_mass(dn.anchored_sides, 1.0) == pytest.approx(1.0, abs=1e-6)

    def test_side_marginal(self):
        f = dn.anchored_side_marginal
        x = np.linspace(0, 8, 50)
        assert np.allclose(f(x), ss.rice(0.5).pdf(x), rtol=1e-13, atol=1e-300)
        cfg = QuadConfig(1e-12, 1e-12)
        assert integrate_1d(f, 0, 40, cfg).value == pytest.approx(1.0, abs=1e-10)
        assert integrate_1d(lambda x: x * f(x), 0, 40, cfg).value == pytest.approx(1.3304473406107031708, abs=1e-10)
        assert integrate_1d(lambda x: x * x * f(x), 0, 40, cfg).value == pytest.approx(2.25, abs=1e-10)


class TestChangeOfVariables:
    @pytest.mark.parametrize("entry", suite.change_of_variable_checks(seed=4), ids=lambda e: e.name)
    def test_pointwise(self, entry):
        assert entry.passed, entry.quadrature

    @pytest.mark.parametrize("family", ["staked", "anchored"])
    def test_gaussian_pushforward_by_simulation(self, family):
        spec = FamilySpec(family, 2, 1.0)
        density = (lambda x, y: dn.staked_sides(1.0, x, y)) if family == "staked" else \
            (lambda x, y: dn.anchored_sides(1.0, x, y))
        res = histogram_gof(spec, "sides2d", density, 8, 10 ** 5, seed=41)
        assert res.p_value > 1e-3


class TestPure:
    def test_equilateral(self):
        assert dn.pure_angles_ndim(2, PI / 3, PI / 3) == pytest.approx(4 * math.sqrt(3) / (9 * PI), rel=1e-14)

    def test_boundary(self):
        assert dn.pure_angles_ndim(2, 0.0, 1.0) == 0.0
        assert dn.pure_angles_ndim(4, 1.0, PI - 1.0) == 0.0

    def test_normalization(self):
        r = integrate_2d(lambda x, y: dn.pure_angles_ndim(2, x, y), ANGLE_SIMPLEX, CFG)
        assert r.value == pytest.approx(1.0, abs=1e-6)


def corr_rice_brute(rho, variant, a, b):
    # joint density of |P - s1|, |Q - s2| for (P, Q) correlated planar normals,
    # integrating the 4-dimensional Gaussian over both polar angles
    s1 = (-0.5, 0.0) if variant == "opposite_center" else (0.5, 0.0)
    s2 = (0.5, 0.0)
    om = 1 - rho * rho

    def f(t, u):
        x1, y1 = s1[0] + a * math.cos(t), s1[1] + a * math.sin(t)
        x2, y2 = s2[0] + b * math.cos(u), s2[1] + b * math.sin(u)
        q = (x1 * x1 + x2 * x2 - 2 * rho * x1 * x2 + y1 * y1 + y2 * y2 - 2 * rho * y1 * y2) / (2 * om)
        return math.exp(-q)

    val, _ = si.dblquad(f, 0, 2 * PI, 0, 2 * PI, epsabs=1e-13, epsrel=1e-11)
    return a * b * val / (4 * PI * PI * om)


class TestCorrelatedRice:
    def test_rho_zero_factorizes(self):
        rng = np.random.default_rng(8)
        a = rng.uniform(0.01, 5, 50)
        b = rng.uniform(0.01, 5, 50)
        ref = a * b * np.exp(-(a * a + b * b) / 2 - 0.25) * sp.i0(a / 2) * sp.i0(b / 2)
        for variant in dn.VARIANTS:
            got = dn.corr_rice_density(dn.CorrRiceParams(0.0), variant, a, b)
            assert np.max(np.abs(got - ref) / ref) <= 1e-12

    def test_zero_at_axes(self):
        p = dn.CorrRiceParams(0.3)
        assert dn.corr_rice_density(p, "same_center", 0.0, 1.0) == 0.0
        assert dn.corr_rice_density(p, "opposite_center", 1.0, 0.0) == 0.0

    @pytest.mark.parametrize("rho", [-0.4, 0.5, 0.8])
    @pytest.mark.parametrize("variant", dn.VARIANTS)
    def test_against_brute_force(self, rho, variant):
        for a, b in ((0.4, 1.1), (1.7, 0.9), (2.5, 2.2)):
            ref = corr_rice_brute(rho, variant, a, b)
            got = dn.corr_rice_density(dn.CorrRiceParams(rho), variant, a, b, fallback=True)
            assert got == pytest.approx(ref, rel=1e-8)

    @pytest.mark.parametrize("variant", dn.VARIANTS)
    def test_angular_route_matches_series(self, variant):
        rng = np.random.default_rng(9)
        a = rng.uniform(0.05, 4, 40)
        b = rng.uniform(0.05, 4, 40)
        p = dn.CorrRiceParams(0.5)
        s = dn.corr_rice_density(p, variant, a, b)
        t = dn.corr_rice_density_angular(0.5, variant, a, b)
        assert np.allclose(s, t, rtol=1e-10, atol=1e-300)

    def test_normalization_half(self):
        p = dn.CorrRiceParams(0.5)
        f = lambda x, y: dn.corr_rice_density(p, "same_center", np.full_like(y, x), y)
        r = integrate_2d(f, rectangle(0, 12, 0, 12), QuadConfig(1e-7, 1e-7))
        assert r.value == pytest.approx(1.0, abs=1e-4)

    def test_cancellation_reported(self):
        p = dn.CorrRiceParams(0.97)
        with pytest.raises(ConvergenceError):
            dn.corr_rice_density(p, "opposite_center", np.array([2.0, 3.0]), np.array([2.5, 3.0]))
        v = dn.corr_rice_density(p, "opposite_center", np.array([2.0, 3.0]), np.array([2.5, 3.0]), fallback=True)
        assert np.all(v > 0)

    def test_omega(self):
        p = dn.CorrRiceParams(0.0)
        assert p.omega("same_center") == pytest.approx(math.exp(-0.25), rel=1e-15)
        assert p.omega("opposite_center") == pytest.approx(math.exp(-0.25), rel=1e-15)
