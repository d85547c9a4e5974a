import math

import mpmath
import numpy as np
import pytest
import scipy.integrate as si
import scipy.special as sp
from hypothesis import given, settings, strategies as st

from gausstri import specfun
from gausstri.errors import DomainError


def erf_maclaurin(x, terms=60):
    # 2/sqrt(pi) * sum (-1)^k x^(2k+1) / (k! (2k+1))
    total = 0.0
    for k in range(terms):
        total += (-1) ** k * x ** (2 * k + 1) / (math.factorial(k) * (2 * k + 1))
    return 2.0 / math.sqrt(math.pi) * total


def i0_series(x, terms=60):
    return sum((x / 2) ** (2 * k) / math.factorial(k) ** 2 for k in range(terms))


class TestErf:
    def test_zero(self):
        assert specfun.erf(0.0) == 0.0

    def test_one_over_root_two(self):
        x = 1 / math.sqrt(2)
        assert specfun.erf(x) == pytest.approx(erf_maclaurin(x), abs=1e-15)
        assert specfun.erf(x) == pytest.approx(0.6826894921370859, abs=1e-15)

    def test_odd_at_point_three(self):
        assert specfun.erf(-0.3) == -specfun.erf(0.3)

    @given(st.floats(-30, 30))
    def test_odd_and_bounded(self, x):
        v = specfun.erf(x)
        assert specfun.erf(-x) == -v
        assert -1.0 <= v <= 1.0
        assert v == pytest.approx(math.erf(x), abs=2e-15)

    @given(st.floats(-6, 6), st.floats(1e-6, 1.0))
    def test_monotone(self, x, h):
        assert specfun.erf(x + h) >= specfun.erf(x)

    @pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan])
    def test_non_finite(self, bad):
        with pytest.raises(DomainError):
            specfun.erf(bad)


class TestBesselI:
    def test_at_zero(self):
        assert specfun.bessel_i(0, 0.0) == 1.0
        assert specfun.bessel_i(1, 0.0) == 0.0
        assert specfun.bessel_i(5, 0.0) == 0.0

    def test_quarter(self):
        assert specfun.bessel_i(0, 0.25) == pytest.approx(i0_series(0.25), rel=1e-15)
        assert specfun.bessel_i(0, 0.25) == pytest.approx(1.0156861412236079, rel=1e-15)

    @given(st.integers(0, 60), st.floats(1e-3, 600))
    @settings(max_examples=200)
    def test_against_scipy(self, m, x):
        ref = sp.ive(m, x)
        if ref < 1e-280:
            return
        assert specfun.bessel_i_scaled(m, x) == pytest.approx(ref, rel=1e-12)

    @given(st.floats(0, 50))
    def test_i0_at_least_one(self, x):
        assert specfun.bessel_i(0, x) >= 1.0

    def test_domain(self):
        with pytest.raises(DomainError):
            specfun.bessel_i(0, -1.0)
        with pytest.raises(DomainError):
            specfun.bessel_i(-1, 1.0)


class TestBesselK:
    @pytest.mark.parametrize("m", [0, 1])
    def test_integral_representation(self, m):
        x = 1 / 16
        ref = mpmath.quad(lambda t: mpmath.exp(-x * mpmath.cosh(t)) * mpmath.cosh(m * t),
                          [0, 2, 4, 6, 8, 10, 12])
        assert specfun.bessel_k(m, x) == pytest.approx(float(ref), rel=1e-12)

    @pytest.mark.parametrize("x", [1 / 16, 1 / 4, 1.0, 4.0])
    def test_wronskian(self, x):
        i0, i1 = specfun.bessel_i(0, x), specfun.bessel_i(1, x)
        k0, k1 = specfun.bessel_k(0, x), specfun.bessel_k(1, x)
        assert i0 * k1 + i1 * k0 == pytest.approx(1 / x, abs=1e-12)

    @given(st.sampled_from([0, 1]), st.floats(1e-4, 500))
    def test_against_scipy(self, m, x):
        assert specfun.bessel_k_scaled(m, x) == pytest.approx(sp.kve(m, x), rel=1e-12)

    @given(st.sampled_from([0, 1]), st.floats(1e-3, 50), st.floats(1e-3, 1.0))
    def test_positive_decreasing(self, m, x, h):
        assert specfun.bessel_k(m, x) > specfun.bessel_k(m, x + h) > 0

    @pytest.mark.parametrize("x", [0.0, -1.0])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            specfun.bessel_k(0, x)


class TestEllipticE:
    def test_endpoints(self):
        assert specfun.ellip_e(0.0) == pytest.approx(math.pi / 2, abs=1e-15)
        assert specfun.ellip_e(1.0) == 1.0

    def test_half(self):
        ref, _ = si.quad(lambda t: math.sqrt(1 - 0.25 * math.sin(t) ** 2), 0, math.pi / 2, epsabs=1e-15)
        assert specfun.ellip_e(0.5) == pytest.approx(ref, abs=1e-14)

    def test_grid_against_defining_integral(self):
        for k in np.linspace(0, 1, 100):
            ref, _ = si.quad(lambda t: math.sqrt(1 - (k * math.sin(t)) ** 2), 0, math.pi / 2,
                             epsabs=1e-13, epsrel=1e-13)
            assert abs(specfun.ellip_e(k) - ref) <= 1e-10

    @given(st.floats(0, 1))
    def test_modulus_convention(self, k):
        # scipy takes the parameter m = k^2
        assert specfun.ellip_e(k) == pytest.approx(sp.ellipe(k * k), abs=1e-14)

    @given(st.floats(0, 0.999), st.floats(1e-6, 1e-3))
    def test_bounds_and_monotone(self, k, h):
        v = specfun.ellip_e(k)
        assert 1.0 <= v <= math.pi / 2
        assert specfun.ellip_e(min(k + h, 1.0)) <= v

    @pytest.mark.parametrize("k", [-0.1, 1.1, math.nan])
    def test_domain(self, k):
        with pytest.raises(DomainError):
            specfun.ellip_e(k)


class TestEllipticK:
    @given(st.floats(0, 0.9999))
    def test_against_scipy(self, k):
        assert specfun.ellip_k(k) == pytest.approx(sp.ellipk(k * k), rel=1e-13)

    def test_domain(self):
        with pytest.raises(DomainError):
            specfun.ellip_k(1.0)


def goldstein_riemann(p, q, n=40000):
    # midpoint rule in s for the outer integral; I0 itself by midpoint rule
    # of (1/pi) int_0^pi exp(z cos t) dt, a brute-force 2D sum
    s = (np.arange(n) + 0.5) * q / n
    t = (np.arange(400) + 0.5) * math.pi / 400
    z = 2 * np.sqrt(p * s)
    i0 = np.exp(np.outer(z, np.cos(t))).mean(axis=1)
    return float(np.sum(np.exp(-s) * i0) * q / n)


class TestGoldsteinJ:
    def test_p_zero(self):
        assert specfun.goldstein_j(0.0, 1.0) == pytest.approx(1 - math.exp(-1), abs=1e-15)

    def test_q_zero(self):
        assert specfun.goldstein_j(0.125, 0.0) == 0.0

    def test_eighth(self):
        lhs = math.exp(-0.125) * specfun.goldstein_j(0.125, 0.125)
        rhs = 0.5 * (1 - math.exp(-0.25) * sp.i0(0.25))
        assert lhs == pytest.approx(rhs, abs=1e-15)

    @pytest.mark.parametrize("p", [0.0, 0.125, 0.5, 1.0])
    @pytest.mark.parametrize("q", [0.125, 0.5, 2.0])
    def test_brute_force_grid(self, p, q):
        assert abs(specfun.goldstein_j(p, q) - goldstein_riemann(p, q)) <= 1e-8

    @given(st.floats(0, 20), st.floats(0, 20))
    @settings(max_examples=60, deadline=None)
    def test_against_mpmath(self, p, q):
        ref = mpmath.quad(lambda s: mpmath.exp(-s) * mpmath.besseli(0, 2 * mpmath.sqrt(p * s)), [0, q])
        assert specfun.goldstein_j(p, q) == pytest.approx(float(ref), rel=1e-13, abs=1e-300)

    @given(st.floats(0, 20), st.floats(0, 20))
    def test_bounds(self, p, q):
        v = specfun.goldstein_j(p, q)
        # I0(z) <= exp(z^2/4) bounds the integrand by exp((p - 1) s)
        assert 0.0 <= v <= min(q * max(1.0, math.exp((p - 1) * q)), math.exp(p)) * (1 + 1e-12)
        if p <= 1:
            assert v <= q * (1 + 1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            specfun.goldstein_j(-1.0, 1.0)


class TestGammaAndChi2:
    @given(st.floats(0.05, 200), st.floats(0, 400))
    def test_incomplete_gamma(self, a, x):
        # near x = a the prefactor exp(a log x - x - lgamma(a)) carries ~a * eps
        assert specfun.gammainc_lower(a, x) == pytest.approx(sp.gammainc(a, x), abs=5e-13)
        assert specfun.gammainc_upper(a, x) == pytest.approx(sp.gammaincc(a, x), abs=5e-13)

    @given(st.floats(0, 500), st.integers(1, 300))
    def test_chi2_sf(self, stat, dof):
        ref = sp.chdtrc(dof, stat)
        assert specfun.chi2_sf(stat, dof) == pytest.approx(ref, rel=1e-10, abs=1e-300)


def test_tolerance_validation():
    with pytest.raises(ValueError):
        specfun.SpecTolerance(abs_tol=0.0)
    with pytest.raises(ValueError):
        specfun.SpecTolerance(max_terms=0)
