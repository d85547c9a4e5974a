"""Quadrature and series engines.

``integrate_1d`` is a globally adaptive Gauss-Kronrod (7/15) scheme that
evaluates the integrand on whole node arrays, so integrands must accept
numpy arrays. ``integrate_2d`` iterates it over regions whose inner
limits depend on the outer variable. Nodes never touch interval
endpoints, which lets integrable endpoint singularities through.
"""
import heapq
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConvergenceError

_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

# 15 Kronrod nodes on [-1, 1] and matching weights
_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])
_KW = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])
_GW = np.zeros(15)
_GW[1::2] = np.concatenate([_WG[:-1], [_WG[-1]], _WG[-2::-1]])


def gaussian_cutoff(tol):
    """Finite cutoff R for integrals with Gaussian-type decay.

    Smallest R with exp(-R^2/4) R^4 < tol/100, never below 14.
    """
    r = 2.0
    while math.exp(-0.25 * r * r) * r ** 4 >= tol / 100.0:
        r += 0.25
    return max(14.0, r)


@dataclass(frozen=True)
class QuadConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_depth: int = 40
    max_terms: int = 500
    truncation_radius_policy: Callable[[float], float] = field(default=gaussian_cutoff)

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")

    @property
    def cutoff(self):
        return self.truncation_radius_policy(self.abs_tol)

    def tightened(self, factor):
        return QuadConfig(self.abs_tol * factor, self.rel_tol * factor, self.max_depth,
                          self.max_terms, self.truncation_radius_policy)


DEFAULT_QUAD = QuadConfig()


@dataclass(frozen=True)
class QuadResult:
    value: float
    err_est: float
    evaluations: int

    def __post_init__(self):
        if self.err_est < 0:
            raise ValueError("err_est must be non-negative")

    def __float__(self):
        return float(self.value)


def _gk15(f, a, b):
    """Kronrod estimates and error for a list of intervals in one call."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x), dtype=float)
    if fx.shape != x.shape:
        fx = np.broadcast_to(fx, x.shape)
    if not np.all(np.isfinite(fx)):
        raise ValueError("integrand returned a non-finite value")
    kron = (fx @ _KW) * half
    gauss = (fx @ _GW) * half
    # QUADPACK error heuristic
    mean = 0.5 * (fx @ _KW)
    resasc = (np.abs(fx - mean[:, None]) @ _KW) * np.abs(half)
    resabs = (np.abs(fx) @ _KW) * np.abs(half)
    err = np.abs(kron - gauss)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(resasc > 0, resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5), err)
    floor = 50.0 * np.finfo(float).eps * resabs
    err = np.maximum(scaled, floor)
    return kron, err


def integrate_1d(f, lo, hi, cfg=DEFAULT_QUAD):
    """Adaptive integral of a vectorized ``f`` over (lo, hi).

    Raises ConvergenceError (carrying the best estimate) when every
    remaining interval with a non-negligible error sits at ``max_depth``.
    """
    lo = float(lo)
    hi = float(hi)
    if not lo < hi:
        if lo == hi:
            return QuadResult(0.0, 0.0, 0)
        raise ValueError("need lo < hi")
    vals, errs = _gk15(f, [lo], [hi])
    evals = 15
    heap = [(-errs[0], lo, hi, vals[0], errs[0], 0)]
    frozen_val = []
    frozen_err = 0.0
    total = vals[0]
    total_err = errs[0]
    while True:
        target = max(cfg.abs_tol, cfg.rel_tol * abs(total))
        if total_err <= target:
            break
        if not heap or frozen_err > target:
            est = math.fsum([item[3] for item in heap] + frozen_val)
            raise ConvergenceError(
                f"max_depth {cfg.max_depth} reached; error {total_err:.3g} > {target:.3g}",
                QuadResult(est, float(total_err), evals))
        # split a batch of the worst intervals at once
        batch = [heapq.heappop(heap)]
        while heap and len(batch) < 8 and -heap[0][0] > 0.25 * batch[0][4]:
            batch.append(heapq.heappop(heap))
        a_list, b_list, depths = [], [], []
        for _, a, b, v, e, d in batch:
            if d >= cfg.max_depth:
                frozen_val.append(v)
                frozen_err += e
                continue
            total -= v
            total_err -= e
            m = 0.5 * (a + b)
            a_list += [a, m]
            b_list += [m, b]
            depths += [d + 1, d + 1]
        if a_list:
            nv, ne = _gk15(f, a_list, b_list)
            evals += 15 * len(a_list)
            for a, b, v, e, d in zip(a_list, b_list, nv, ne, depths):
                heapq.heappush(heap, (-e, a, b, v, e, d))
                total += v
                total_err += e
    value = math.fsum([item[3] for item in heap] + frozen_val)
    err = math.fsum([item[4] for item in heap]) + frozen_err
    return QuadResult(value, float(err), evals)


def integrate_semi_infinite(f, lo, cfg=DEFAULT_QUAD, scale=1.0):
    """Integral over (lo, inf) for integrands with Gaussian-type decay.

    The tail beyond ``lo + scale * R`` is dropped, R from the config's
    truncation policy.
    """
    return integrate_1d(f, lo, lo + scale * cfg.cutoff, cfg)


# ---------------------------------------------------------------------------
# two dimensions

@dataclass(frozen=True)
class Region:
    """{(x, y): x_lo < x < x_hi, y_lo(x) < y < y_hi(x)}.

    The inner limits may be constants or callables of x.
    """
    x_lo: float
    x_hi: float
    y_lo: object
    y_hi: object

    def bounds(self, x):
        lo = self.y_lo(x) if callable(self.y_lo) else self.y_lo
        hi = self.y_hi(x) if callable(self.y_hi) else self.y_hi
        return float(lo), float(hi)


def rectangle(x_lo, x_hi, y_lo, y_hi):
    return Region(x_lo, x_hi, y_lo, y_hi)


def simplex(total=math.pi):
    """Open triangle x > 0, y > 0, x + y < total."""
    return Region(0.0, total, 0.0, lambda x: total - x)


ANGLE_SIMPLEX = simplex(math.pi)


def integrate_2d(f, region, cfg=DEFAULT_QUAD):
    """Iterated adaptive integral of ``f(x, y)`` over ``region``.

    For each outer node x the inner variable is y = y_lo + (y_hi - y_lo) s
    with s in (0, 1); on the angle simplex this is the square map
    (x, (pi - x) s), so sin(x + y) -> 0 never forces sliver intervals.
    ``f`` is called with a scalar x and an array of y.
    """
    width = region.x_hi - region.x_lo
    inner_cfg = QuadConfig(cfg.abs_tol / (10.0 * max(width, 1.0)), cfg.rel_tol / 10.0,
                           cfg.max_depth, cfg.max_terms, cfg.truncation_radius_policy)
    counter = [0, 0.0]

    def outer(xs):
        out = np.empty(xs.shape)
        flat = out.reshape(-1)
        for i, x in enumerate(xs.reshape(-1)):
            lo, hi = region.bounds(x)
            if hi <= lo:
                flat[i] = 0.0
                continue
            res = integrate_1d(lambda y, x=x: f(x, y), lo, hi, inner_cfg)
            counter[0] += res.evaluations
            counter[1] = max(counter[1], res.err_est)
            flat[i] = res.value
        return out

    res = integrate_1d(outer, region.x_lo, region.x_hi, cfg)
    return QuadResult(res.value, res.err_est + counter[1] * width, counter[0])


# ---------------------------------------------------------------------------
# inverse square-root endpoint singularities

def integrate_sqrt_singular(h, y_lo, y_hi, cfg=DEFAULT_QUAD):
    """int_{y_lo}^{y_hi} h(y) / sqrt((y - y_lo)(y_hi - y)) dy.

    With y = m + r sin t (m midpoint, r half-width) the weight cancels
    exactly and the integral becomes int_{-pi/2}^{pi/2} h(m + r sin t) dt.
    """
    y_lo = float(y_lo)
    y_hi = float(y_hi)
    if not y_lo < y_hi:
        raise ValueError("need y_lo < y_hi")
    m = 0.5 * (y_lo + y_hi)
    r = 0.5 * (y_hi - y_lo)
    return integrate_1d(lambda t: h(m + r * np.sin(t)), -0.5 * math.pi, 0.5 * math.pi, cfg)


_GL_CACHE = {}


def gauss_legendre(order):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


def sqrt_singular_fixed(h, y_lo, y_hi, order=64):
    """Fixed-order version of :func:`integrate_sqrt_singular` for arrays.

    ``y_lo`` and ``y_hi`` broadcast together; ``h`` receives y with one
    extra trailing axis of length ``order``.
    """
    y_lo = np.asarray(y_lo, dtype=float)
    y_hi = np.asarray(y_hi, dtype=float)
    nodes, weights = gauss_legendre(order)
    t = 0.5 * math.pi * nodes
    m = 0.5 * (y_lo + y_hi)[..., None]
    r = 0.5 * (y_hi - y_lo)[..., None]
    vals = h(m + r * np.sin(t))
    return 0.5 * math.pi * (vals @ weights)


# ---------------------------------------------------------------------------
# epsilon-weighted Bessel series

def sum_bessel_series(term, cfg=DEFAULT_QUAD, consecutive=3):
    """sum_k eps_k term(k) with eps_0 = 1, eps_k = 2.

    Stops once |eps_k term(k)| <= abs_tol |partial sum| for ``consecutive``
    k in a row. Hitting ``max_terms`` raises ConvergenceError.
    """
    total = float(term(0))
    quiet = 0
    for k in range(1, cfg.max_terms):
        t = 2.0 * float(term(k))
        total += t
        if abs(t) <= cfg.abs_tol * abs(total):
            quiet += 1
            if quiet >= consecutive:
                return total
        else:
            quiet = 0
    raise ConvergenceError(f"series not converged after {cfg.max_terms} terms", total)
