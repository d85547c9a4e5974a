"""Special functions used by the closed forms.

Everything here is double precision and self-contained (no scipy).
Scalar inputs give Python floats; the Bessel I routines and ``ellip_e``
also broadcast over numpy arrays because the densities call them on
quadrature nodes.

Conventions
-----------
``ellip_e(k)`` takes the *modulus* k, i.e.
``E(k) = int_0^{pi/2} sqrt(1 - k^2 sin^2 t) dt``, not the parameter m = k^2.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

EULER_GAMMA = 0.5772156649015329

# switch between power series and large-argument expansion for I0, I1
_I_SERIES_MAX = 30.0
# switch between power series and the cosh integral for K0, K1
_K_SERIES_MAX = 2.0


@dataclass(frozen=True)
class SpecTolerance:
    abs_tol: float = 1e-12
    max_terms: int = 500

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_TOL = SpecTolerance()


def _check_finite(x, name="x"):
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x!r}")


# ---------------------------------------------------------------------------
# incomplete gamma, erf, chi-square tail

def _gamma_series(a, x, eps, itmax):
    # P(a, x) by the power series, good for x < a + 1
    ap = a
    term = total = 1.0 / a
    for _ in range(itmax):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * eps:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise ConvergenceError("incomplete gamma series did not converge")


def _gamma_cfrac(a, x, eps, itmax):
    # Q(a, x) by modified Lentz continued fraction, good for x >= a + 1
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, itmax + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h
    raise ConvergenceError("incomplete gamma continued fraction did not converge")


def gammainc_lower(a, x, eps=1e-16, itmax=10_000):
    """Regularized lower incomplete gamma P(a, x)."""
    if not (a > 0 and x >= 0):
        raise DomainError("need a > 0 and x >= 0")
    if x == 0:
        return 0.0
    if x < a + 1.0:
        return _gamma_series(a, x, eps, itmax)
    return 1.0 - _gamma_cfrac(a, x, eps, itmax)


def gammainc_upper(a, x, eps=1e-16, itmax=10_000):
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    if not (a > 0 and x >= 0):
        raise DomainError("need a > 0 and x >= 0")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x, eps, itmax)
    return _gamma_cfrac(a, x, eps, itmax)


def erf(x):
    """Error function, via erf(x) = sign(x) P(1/2, x^2)."""
    x = float(x)
    _check_finite(x)
    if x == 0.0:
        return 0.0
    val = gammainc_lower(0.5, x * x)
    return math.copysign(val, x)


def chi2_sf(stat, dof):
    """Upper tail probability of a chi-square variable with ``dof`` degrees."""
    if dof <= 0:
        raise DomainError("dof must be positive")
    if stat <= 0:
        return 1.0
    return gammainc_upper(0.5 * dof, 0.5 * stat)


# ---------------------------------------------------------------------------
# modified Bessel functions of the first kind

def _i01_scaled(x, scaled=True):
    """e^{-x} I0(x) and e^{-x} I1(x) for an array x >= 0 (unscaled if asked)."""
    x = np.asarray(x, dtype=float)
    i0 = np.empty_like(x)
    i1 = np.empty_like(x)

    small = x <= _I_SERIES_MAX
    if np.any(small):
        xs = x[small]
        q = 0.25 * xs * xs
        t0 = np.ones_like(xs)
        t1 = np.ones_like(xs)
        s0 = t0.copy()
        s1 = t1.copy()
        for k in range(1, 200):
            t0 = t0 * q / (k * k)
            t1 = t1 * q / (k * (k + 1))
            s0 += t0
            s1 += t1
            if np.all(t0 <= 1e-17 * s0):
                break
        # the series gives I_m directly; scaling and unscaling would cost an ulp
        scale = np.exp(-xs) if scaled else 1.0
        i0[small] = s0 * scale
        i1[small] = 0.5 * xs * s1 * scale

    big = ~small
    if np.any(big):
        xb = x[big]
        for nu, out in ((0, i0), (1, i1)):
            mu = 4.0 * nu * nu
            term = np.ones_like(xb)
            total = term.copy()
            for k in range(1, 40):
                term = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * xb)
                total += term
            out[big] = total / np.sqrt(2.0 * np.pi * xb)
            if not scaled:
                out[big] *= np.exp(xb)
    return i0, i1


def _ratio_start(m, xmax):
    return max(m, int(xmax)) + 40 + int(8.0 * math.sqrt(xmax))


def bessel_i_scaled(m, x):
    """e^{-x} I_m(x) for integer order m >= 0 and x >= 0.

    Orders above one are built from e^{-x} I0(x) and the ratios
    I_k/I_{k-1}, which are obtained by backward recurrence of the
    continued fraction r_k = x / (2k + x r_{k+1}).
    """
    return _bessel_i(m, x, True)


def _bessel_i(m, x, scaled):
    m = int(m)
    arr = np.asarray(x, dtype=float)
    if m < 0:
        raise DomainError("order must be non-negative")
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError("argument must be finite and non-negative")
    i0, i1 = _i01_scaled(arr, scaled)
    if m == 0:
        out = i0
    elif m == 1:
        out = i1
    else:
        xmax = float(arr.max()) if arr.size else 0.0
        r = np.zeros_like(arr)
        prod = np.ones_like(arr)
        for k in range(_ratio_start(m, xmax), 0, -1):
            r = arr / (2.0 * k + arr * r)
            if k <= m:
                prod = prod * r
        out = i0 * prod
    return float(out) if np.ndim(x) == 0 else out


def bessel_i(m, x):
    """Modified Bessel function of the first kind I_m(x), x >= 0."""
    return _bessel_i(m, x, False)


def bessel_i_scaled_table(x, kmax):
    """Rows e^{-x} I_k(x) for k = 0..kmax, shape ``x.shape + (kmax + 1,)``."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(arr < 0):
        raise DomainError("argument must be non-negative")
    i0, _ = _i01_scaled(arr)
    xmax = float(arr.max()) if arr.size else 0.0
    ratios = np.zeros(arr.shape + (kmax + 1,))
    r = np.zeros_like(arr)
    for k in range(_ratio_start(kmax, xmax), 0, -1):
        r = arr / (2.0 * k + arr * r)
        if k <= kmax:
            ratios[..., k] = r
    ratios[..., 0] = i0
    return np.cumprod(ratios, axis=-1)


# ---------------------------------------------------------------------------
# modified Bessel functions of the second kind

def _k_series(m, x):
    q = 0.25 * x * x
    lg = math.log(0.5 * x)
    if m == 0:
        term = 1.0
        harmonic = 0.0
        total = -(lg + EULER_GAMMA) * float(bessel_i(0, x))
        for k in range(1, 200):
            term *= q / (k * k)
            harmonic += 1.0 / k
            total += term * harmonic
            if term * harmonic < 1e-18 * abs(total):
                break
        return total
    # m == 1
    psi1 = -EULER_GAMMA          # psi(k + 1)
    psi2 = 1.0 - EULER_GAMMA     # psi(k + 2)
    term = 1.0
    acc = psi1 + psi2
    for k in range(1, 200):
        term *= q / (k * (k + 1))
        psi1 += 1.0 / k
        psi2 += 1.0 / (k + 1)
        acc += term * (psi1 + psi2)
        if abs(term * (psi1 + psi2)) < 1e-18 * abs(acc):
            break
    return 1.0 / x + lg * float(bessel_i(1, x)) - 0.25 * x * acc


def _k_scaled_cosh(m, x):
    # e^x K_m(x) = int_0^inf exp(-x (cosh t - 1)) cosh(m t) dt; the
    # trapezoid rule is exponentially accurate for this analytic integrand
    h = min(0.05, 0.3 / math.sqrt(x))
    tmax = math.acosh(1.0 + 750.0 / x)
    t = np.arange(0.0, tmax + h, h)
    f = np.exp(-x * (np.cosh(t) - 1.0)) * np.cosh(m * t)
    return h * (f.sum() - 0.5 * f[0])


def bessel_k_scaled(m, x):
    """e^{x} K_m(x) for m in {0, 1} and x > 0."""
    if m not in (0, 1):
        raise DomainError("only orders 0 and 1 are provided")
    x = float(x)
    _check_finite(x)
    if x <= 0:
        raise DomainError("K_m diverges at x <= 0")
    if x <= _K_SERIES_MAX:
        return _k_series(m, x) * math.exp(x)
    return float(_k_scaled_cosh(m, x))


def bessel_k(m, x):
    """Modified Bessel function of the second kind K_m(x), m in {0, 1}."""
    x = float(x)
    if x > 0 and x <= _K_SERIES_MAX and m in (0, 1):
        return _k_series(m, x)
    return bessel_k_scaled(m, x) * math.exp(-x)


# ---------------------------------------------------------------------------
# complete elliptic integral of the second kind

def ellip_e(k):
    """Complete elliptic integral of the second kind, modulus convention.

    Arithmetic-geometric mean: E = K (1 - sum_n 2^(n-1) c_n^2).
    """
    arr = np.asarray(k, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
        raise DomainError("modulus must lie in [0, 1]")
    a = np.ones_like(arr)
    b = np.sqrt((1.0 - arr) * (1.0 + arr))
    c = arr.copy()
    total = 0.5 * c * c
    power = 0.5
    for _ in range(60):
        # c_{n+1} = c_n^2 / (4 a_{n+1}) avoids the cancellation in (a_n - b_n) / 2
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        c = c * c / (4.0 * a)
        power *= 2.0
        total = total + power * c * c
        if np.all(np.abs(c) <= 1e-17 * a):
            break
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 0.5 * np.pi / a * (1.0 - total)
    out = np.where(arr == 1.0, 1.0, out)
    return float(out) if np.ndim(k) == 0 else out


def ellip_k(k):
    """Complete elliptic integral of the first kind, modulus convention, k < 1."""
    arr = np.asarray(k, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr >= 1):
        raise DomainError("modulus must lie in [0, 1)")
    a = np.ones_like(arr)
    b = np.sqrt((1.0 - arr) * (1.0 + arr))
    for _ in range(60):
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        if np.all(np.abs(a - b) <= 1e-17 * a):
            break
    out = 0.5 * np.pi / a
    return float(out) if np.ndim(k) == 0 else out


# ---------------------------------------------------------------------------
# Goldstein's J function

def _gamma_tail_ratio(a, x):
    # sum_j x^j / ((a+1)...(a+j)), so P(a, x) = e^{-x} x^a / a! times this
    term = total = 1.0
    j = 1
    while term > 1e-17 * total:
        term *= x / (a + j)
        total += term
        j += 1
    return total


def goldstein_j(p, q, tol=DEFAULT_TOL):
    """J(p, q) = int_0^q exp(-s) I0(2 sqrt(p s)) ds.

    Expanding I0 termwise gives sum_k p^k / k! * P(k + 1, q). The
    regularized gamma follows P(k+1, q) = P(k, q) - e^{-q} q^k / k! while
    k < q; past that the difference cancels, so P is summed directly.
    """
    p = float(p)
    q = float(q)
    _check_finite(p, "p")
    _check_finite(q, "q")
    if p < 0 or q < 0:
        raise DomainError("p and q must be non-negative")
    if q == 0:
        return 0.0
    eq = math.exp(-q)
    pk = 1.0          # p^k / k!
    qk = 1.0          # q^k / k!
    gam = -math.expm1(-q)   # P(1, q)
    total = gam
    for k in range(1, 10 * tol.max_terms):
        pk *= p / k
        qk *= q / k
        if k + 1 > q:
            gam = eq * qk * q / (k + 1) * _gamma_tail_ratio(k + 1, q)
        else:
            gam -= eq * qk
        term = pk * max(gam, 0.0)
        total += term
        if term <= 1e-17 * total and pk <= 1e-17 * total:
            return total
    raise ConvergenceError("Goldstein series did not converge", total)
