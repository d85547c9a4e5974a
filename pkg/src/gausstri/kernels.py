"""Hot inner loops, each in a numba loop form and a numpy array form.

``triangle_kernel`` turns vertex arrays into sides, angles and flags for a
whole Monte Carlo chunk. ``corr_rice_kernel`` sums the correlated Rice
Bessel series on many (a, b) points. The public names dispatch on
``_accel.USE_NUMBA``; the ``*_loop`` / ``*_numpy`` variants stay importable
for the benchmark and for cross-checking the two paths.
"""
import math

import numpy as np

from . import _accel
from ._accel import njit
from .model import DEGENERACY_RTOL
from .specfun import bessel_i_scaled_table

HALF_PI = 0.5 * math.pi

# status codes returned by the series kernels
OK = 0
NOT_CONVERGED = 1
CANCELLED = 2


# ---------------------------------------------------------------------------
# triangles

@njit
def triangle_kernel_loop(pa, pb, pc):
    n, dim = pa.shape
    out = np.empty((6, n))
    obtuse = np.empty(n, dtype=np.bool_)
    degenerate = np.empty(n, dtype=np.bool_)
    for i in range(n):
        sa = 0.0
        sb = 0.0
        sc = 0.0
        for j in range(dim):
            d1 = pb[i, j] - pc[i, j]
            d2 = pa[i, j] - pc[i, j]
            d3 = pa[i, j] - pb[i, j]
            sa += d1 * d1
            sb += d2 * d2
            sc += d3 * d3
        a = math.sqrt(sa)
        b = math.sqrt(sb)
        c = math.sqrt(sc)
        m1 = -a + b + c
        m2 = a - b + c
        m3 = a + b - c
        per = a + b + c
        big = max(a, max(b, c))
        degenerate[i] = min(m1, min(m2, m3)) <= DEGENERACY_RTOL * big
        if degenerate[i]:
            m1 = max(m1, 0.0)
            m2 = max(m2, 0.0)
            m3 = max(m3, 0.0)
        alpha = 2.0 * math.atan2(math.sqrt(m2 * m3), math.sqrt(per * m1))
        beta = 2.0 * math.atan2(math.sqrt(m3 * m1), math.sqrt(per * m2))
        gamma = 2.0 * math.atan2(math.sqrt(m1 * m2), math.sqrt(per * m3))
        out[0, i] = a
        out[1, i] = b
        out[2, i] = c
        out[3, i] = alpha
        out[4, i] = beta
        out[5, i] = gamma
        obtuse[i] = max(alpha, max(beta, gamma)) > HALF_PI
    return out, obtuse, degenerate


def triangle_kernel_numpy(pa, pb, pc):
    a = np.sqrt(np.sum((pb - pc) ** 2, axis=1))
    b = np.sqrt(np.sum((pa - pc) ** 2, axis=1))
    c = np.sqrt(np.sum((pa - pb) ** 2, axis=1))
    m1 = -a + b + c
    m2 = a - b + c
    m3 = a + b - c
    per = a + b + c
    big = np.maximum(a, np.maximum(b, c))
    degenerate = np.minimum(m1, np.minimum(m2, m3)) <= DEGENERACY_RTOL * big
    m1 = np.maximum(m1, 0.0)
    m2 = np.maximum(m2, 0.0)
    m3 = np.maximum(m3, 0.0)
    alpha = 2.0 * np.arctan2(np.sqrt(m2 * m3), np.sqrt(per * m1))
    beta = 2.0 * np.arctan2(np.sqrt(m3 * m1), np.sqrt(per * m2))
    gamma = 2.0 * np.arctan2(np.sqrt(m1 * m2), np.sqrt(per * m3))
    out = np.stack([a, b, c, alpha, beta, gamma])
    obtuse = np.maximum(alpha, np.maximum(beta, gamma)) > HALF_PI
    return out, obtuse, degenerate


def triangle_kernel(pa, pb, pc):
    """Sides, angles, obtuse flags and degeneracy flags for vertex rows.

    Returns ``(out, obtuse, degenerate)`` where ``out`` stacks
    a, b, c, alpha, beta, gamma as rows.
    """
    pa = np.ascontiguousarray(pa, dtype=np.float64)
    pb = np.ascontiguousarray(pb, dtype=np.float64)
    pc = np.ascontiguousarray(pc, dtype=np.float64)
    if _accel.USE_NUMBA:
        return triangle_kernel_loop(pa, pb, pc)
    return triangle_kernel_numpy(pa, pb, pc)


# ---------------------------------------------------------------------------
# correlated Rice series

@njit
def _i0_scaled_scalar(x):
    if x <= 30.0:
        q = 0.25 * x * x
        t = 1.0
        s = 1.0
        k = 1
        while True:
            t *= q / (k * k)
            s += t
            if t <= 1e-17 * s:
                break
            k += 1
        return s * math.exp(-x)
    term = 1.0
    total = 1.0
    for k in range(1, 40):
        term = -term * (-(2 * k - 1) ** 2) / (8.0 * k * x)
        total += term
    return total / math.sqrt(2.0 * math.pi * x)


@njit
def _scaled_row(z, kmax, row):
    # row[k] = e^{-z} I_k(z), k = 0..kmax, via backward ratio recurrence
    start = max(kmax, int(z)) + 40 + int(8.0 * math.sqrt(z))
    r = 0.0
    for k in range(start, 0, -1):
        r = z / (2.0 * k + z * r)
        if k <= kmax:
            row[k] = r
    row[0] = _i0_scaled_scalar(z)
    for k in range(1, kmax + 1):
        row[k] = row[k] * row[k - 1]


def _series_kmax(z1, z2, z3, max_terms):
    need = 40 + int(2.0 * (z2 + z3) + 4.0 * math.sqrt(z1))
    return min(max_terms - 1, need)


@njit
def corr_rice_kernel_loop(a, b, rho, opposite, abs_tol, max_terms, cancel_limit):
    n = a.shape[0]
    vals = np.zeros(n)
    status = np.zeros(n, dtype=np.int64)
    one_m = 1.0 - rho * rho
    d = (1.0 - rho) if opposite else (1.0 + rho)
    omega = math.exp(-1.0 / (4.0 * d)) / one_m
    row1 = np.empty(max_terms + 1)
    row2 = np.empty(max_terms + 1)
    row3 = np.empty(max_terms + 1)
    for i in range(n):
        ai = a[i]
        bi = b[i]
        if ai <= 0.0 or bi <= 0.0:
            continue
        z1s = ai * bi * rho / one_m
        z1 = abs(z1s)
        z2 = ai / (2.0 * d)
        z3 = bi / (2.0 * d)
        kmax = min(max_terms - 1, 40 + int(2.0 * (z2 + z3) + 4.0 * math.sqrt(z1)))
        done = False
        while not done:
            _scaled_row(z1, kmax, row1)
            _scaled_row(z2, kmax, row2)
            _scaled_row(z3, kmax, row3)
            total = row1[0] * row2[0] * row3[0]
            biggest = abs(total)
            quiet = 0
            converged = False
            for k in range(1, kmax + 1):
                t = 2.0 * row1[k] * row2[k] * row3[k]
                if (opposite and k % 2 == 1) != (z1s < 0.0 and k % 2 == 1):
                    t = -t
                total += t
                biggest = max(biggest, abs(t))
                if abs(t) <= abs_tol * abs(total):
                    quiet += 1
                    if quiet >= 3:
                        converged = True
                        break
                else:
                    quiet = 0
            if converged or kmax >= max_terms - 1:
                done = True
            else:
                kmax = max_terms - 1
        expo = -(ai * ai + bi * bi) / (2.0 * one_m) + z1 + z2 + z3
        vals[i] = omega * ai * bi * math.exp(expo) * total
        if not converged:
            status[i] = NOT_CONVERGED
        elif total <= 0.0 or biggest > cancel_limit * abs(total):
            status[i] = CANCELLED
    return vals, status


def corr_rice_kernel_numpy(a, b, rho, opposite, abs_tol, max_terms, cancel_limit):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    vals = np.zeros(a.shape)
    status = np.zeros(a.shape, dtype=np.int64)
    live = (a > 0) & (b > 0)
    if not np.any(live):
        return vals, status
    al = a[live]
    bl = b[live]
    one_m = 1.0 - rho * rho
    d = (1.0 - rho) if opposite else (1.0 + rho)
    omega = math.exp(-1.0 / (4.0 * d)) / one_m
    z1s = al * bl * rho / one_m
    z1 = np.abs(z1s)
    z2 = al / (2.0 * d)
    z3 = bl / (2.0 * d)
    kmax = _series_kmax(float(z1.max()), float(z2.max()), float(z3.max()), max_terms)
    while True:
        terms = (bessel_i_scaled_table(z1, kmax) * bessel_i_scaled_table(z2, kmax)
                 * bessel_i_scaled_table(z3, kmax))
        k = np.arange(kmax + 1)
        sign = np.ones((al.size, kmax + 1))
        flip = (k % 2 == 1)
        if opposite:
            sign[:, flip] *= -1.0
        sign[np.ix_(z1s < 0, flip)] *= -1.0
        terms = terms * sign
        terms[:, 1:] *= 2.0
        partial = np.cumsum(terms, axis=1)
        quiet = np.abs(terms) <= abs_tol * np.abs(partial)
        quiet[:, 0] = False
        run = quiet[:, 1:-2] & quiet[:, 2:-1] & quiet[:, 3:]
        hit = run.any(axis=1)
        if hit.all() or kmax >= max_terms - 1:
            break
        kmax = max_terms - 1
    stop = np.where(hit, run.argmax(axis=1) + 3, kmax)
    rows = np.arange(al.size)
    total = partial[rows, stop]
    upto = np.arange(kmax + 1)[None, :] <= stop[:, None]
    biggest = np.max(np.where(upto, np.abs(terms), 0.0), axis=1)
    expo = -(al * al + bl * bl) / (2.0 * one_m) + z1 + z2 + z3
    vals[live] = omega * al * bl * np.exp(expo) * total
    st = np.where(hit, OK, NOT_CONVERGED)
    st = np.where(hit & ((total <= 0) | (biggest > cancel_limit * np.abs(total))), CANCELLED, st)
    status[live] = st
    return vals, status


def corr_rice_kernel(a, b, rho, opposite, abs_tol=1e-14, max_terms=500, cancel_limit=1e6):
    """Correlated Rice density on flat arrays of (a, b) plus per-point status.

    ``opposite`` selects the (-1)^k weights and the 1 - rho scalings.
    Status is OK, NOT_CONVERGED (max_terms hit) or CANCELLED (terms
    exceed the sum by more than ``cancel_limit``, so most digits are gone).
    """
    a = np.ascontiguousarray(a, dtype=np.float64).ravel()
    b = np.ascontiguousarray(b, dtype=np.float64).ravel()
    if _accel.USE_NUMBA:
        return corr_rice_kernel_loop(a, b, float(rho), bool(opposite), float(abs_tol),
                                     int(max_terms), float(cancel_limit))
    return corr_rice_kernel_numpy(a, b, float(rho), bool(opposite), abs_tol, max_terms, cancel_limit)
