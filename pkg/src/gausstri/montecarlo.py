"""Monte Carlo estimators with standard errors, and histogram goodness of fit.

Samples are produced in fixed-size chunks; chunk ``i`` always draws from
``RngStream(seed, i)``. Per-chunk (count, mean, M2) summaries are merged in
chunk order, so an estimate depends only on (seed, n, chunk_size) and not
on how many worker threads evaluated the chunks.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import FamilySpec
from .numerics import QuadConfig, gauss_legendre, integrate_1d, integrate_2d, rectangle
from .samplers import TriangleBatch, chunk_sizes, chunk_stream, sample_family
from .specfun import chi2_sf

DEFAULT_CHUNK = 1 << 16
MIN_SAMPLES = 100


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    n: int
    seed: int
    degenerate: int = 0

    def within(self, target, k=3.0):
        return abs(self.value - target) <= k * self.stderr

    def zscore(self, target):
        if self.stderr == 0:
            return 0.0 if self.value == target else math.inf
        return (self.value - target) / self.stderr


@dataclass(frozen=True)
class GofResult:
    chi2: float
    dof: int
    p_value: float
    bins: int


def _chunk(spec, seed, index, size, fn):
    batch = sample_family(spec, chunk_stream(seed, index), size)
    return fn(batch), batch.degenerate


def map_chunks(spec, fn, n, seed, chunk_size=DEFAULT_CHUNK, workers=1):
    """Apply ``fn`` to every chunk's TriangleBatch; results in chunk order."""
    sizes = chunk_sizes(n, chunk_size)
    jobs = [(spec, seed, i, size, fn) for i, size in enumerate(sizes)]
    if workers <= 1:
        return [_chunk(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: _chunk(*job), jobs))


def _summaries(values):
    # values: (k, m) array of k statistics over m samples
    mean = values.mean(axis=1)
    m2 = ((values - mean[:, None]) ** 2).sum(axis=1)
    return values.shape[1], mean, m2


def _merge(parts):
    count = 0
    mean = None
    m2 = None
    for c, mu, s in parts:
        if mean is None:
            count, mean, m2 = c, mu.copy(), s.copy()
            continue
        total = count + c
        delta = mu - mean
        mean = mean + delta * (c / total)
        m2 = m2 + s + delta * delta * (count * c / total)
        count = total
    return count, mean, m2


def estimate_moments(spec, funcs, n, seed, chunk_size=DEFAULT_CHUNK, workers=1):
    """Estimate E[f(T)] for several vectorized ``f(batch)`` on one sample.

    ``funcs`` maps names to callables; returns names mapped to Estimates.
    """
    if n < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples")
    names = list(funcs)

    def stats(batch):
        vals = np.stack([np.broadcast_to(np.asarray(funcs[k](batch), dtype=float), (len(batch),))
                         for k in names])
        return _summaries(vals)

    results = map_chunks(spec, stats, n, seed, chunk_size, workers)
    count, mean, m2 = _merge([r[0] for r in results])
    degenerate = sum(r[1] for r in results)
    out = {}
    for i, name in enumerate(names):
        var = max(m2[i] / count, 0.0)
        out[name] = Estimate(float(mean[i]), math.sqrt(var / count), count, seed, degenerate)
    return out


def estimate_moment(spec, f, n, seed, chunk_size=DEFAULT_CHUNK, workers=1):
    return estimate_moments(spec, {"f": f}, n, seed, chunk_size, workers)["f"]


def estimate_probability(spec, event, n, seed, chunk_size=DEFAULT_CHUNK, workers=1):
    """P(event) with the binomial standard error sqrt(p (1 - p) / n)."""
    return estimate_moment(spec, lambda t: np.asarray(event(t), dtype=bool).astype(float),
                           n, seed, chunk_size, workers)


def sample_all(spec, n, seed, chunk_size=DEFAULT_CHUNK, workers=1):
    """Concatenate all chunks into one TriangleBatch (same draws as the estimators)."""
    parts = map_chunks(spec, lambda b: b, n, seed, chunk_size, workers)
    batches = [p[0] for p in parts]
    cat = {k: np.concatenate([getattr(b, k) for b in batches])
           for k in ("a", "b", "c", "alpha", "beta", "gamma", "obtuse")}
    return TriangleBatch(**cat, degenerate=sum(p[1] for p in parts))


# ---------------------------------------------------------------------------
# goodness of fit

def chi2_test(counts, probs, total=None, min_expected=5.0):
    """Pearson chi-square of observed counts against cell probabilities.

    ``total`` is the sample size (defaults to the sum of counts). Cells with
    expected count below ``min_expected`` go into one remainder cell, which
    also absorbs samples outside the binned range and probability mass the
    cells do not cover. A remainder that is still too small is merged into
    the smallest regular cell.
    """
    counts = np.asarray(counts, dtype=float).ravel()
    probs = np.asarray(probs, dtype=float).ravel()
    total = counts.sum() if total is None else float(total)
    expected = probs * total
    keep = expected >= min_expected
    obs = counts[keep]
    exp = expected[keep]
    rest_obs = total - obs.sum()
    rest_exp = total - exp.sum()
    if rest_exp >= min_expected:
        obs = np.append(obs, rest_obs)
        exp = np.append(exp, rest_exp)
    elif obs.size:
        j = int(np.argmin(exp))
        obs[j] += rest_obs
        exp[j] += rest_exp
    stat = float(np.sum((obs - exp) ** 2 / exp))
    dof = obs.size - 1
    return GofResult(stat, dof, chi2_sf(stat, dof) if dof > 0 else 1.0, int(obs.size))


def _arcsine_coord(v, lo, hi):
    # position of v inside (lo, hi) after v = m + r sin(pi (t - 1/2))
    m = 0.5 * (lo + hi)
    r = 0.5 * (hi - lo)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.clip((v - m) / r, -1.0, 1.0)
    return np.arcsin(s) / math.pi + 0.5


def _from_arcsine(t, lo, hi):
    m = 0.5 * (lo + hi)
    r = 0.5 * (hi - lo)
    theta = math.pi * (t - 0.5)
    return m + r * np.sin(theta), math.pi * r * np.cos(theta)


def _length_edges(bins, top=4.5, tail=10.0):
    return np.concatenate([np.linspace(0.0, top, bins), [top + tail]])


def histogram_gof(spec: FamilySpec, coordinate, density, bins, n, seed, which=None,
                  chunk_size=DEFAULT_CHUNK, workers=1, cfg=QuadConfig(1e-9, 1e-9)):
    """Chi-square test of sampled triangles against a closed density.

    coordinate:
      ``angles2d``       density(alpha, beta), cells on (alpha, beta/(pi - alpha))
      ``sides2d``        density(a, b) at the family's fixed c, cells on
                         (a, arcsine position of b in (|a - c|, a + c))
      ``sides3d``        density(a, b, c), cells on (a, b, arcsine position of c)
      ``side_marginal``  density(x) of side ``which``
      ``angle_marginal`` density(x) of angle ``which``

    Cell probabilities come from quadrature of the density in these
    coordinates, where the inverse square-root edges of the side laws and
    the thin corners of the angle simplex are mapped away.
    """
    tri = sample_all(spec, n, seed, chunk_size, workers)
    pi = math.pi

    if coordinate == "angle_marginal":
        name = which or "alpha"
        edges = np.linspace(0.0, pi, bins + 1)
        counts, _ = np.histogram(getattr(tri, name), edges)
        probs = [integrate_1d(density, lo, hi, cfg).value for lo, hi in zip(edges[:-1], edges[1:])]

    elif coordinate == "side_marginal":
        name = which or "a"
        edges = _length_edges(bins + 1, top=6.0 if name == "c" else 4.5)
        counts, _ = np.histogram(getattr(tri, name), edges)
        probs = [integrate_1d(density, lo, hi, cfg).value for lo, hi in zip(edges[:-1], edges[1:])]

    elif coordinate == "angles2d":
        xe = np.linspace(0.0, pi, bins + 1)
        se = np.linspace(0.0, 1.0, bins + 1)
        s = tri.beta / (pi - tri.alpha)
        counts, _, _ = np.histogram2d(tri.alpha, s, [xe, se])

        def mapped(x, s):
            return density(x, (pi - x) * s) * (pi - x)

        probs = [[integrate_2d(mapped, rectangle(x0, x1, s0, s1), cfg).value
                  for s0, s1 in zip(se[:-1], se[1:])] for x0, x1 in zip(xe[:-1], xe[1:])]

    elif coordinate == "sides2d":
        c = spec.c
        ae = _length_edges(bins)
        te = np.linspace(0.0, 1.0, bins + 1)
        t = _arcsine_coord(tri.b, np.abs(tri.a - c), tri.a + c)
        counts, _, _ = np.histogram2d(tri.a, t, [ae, te])

        def mapped(a, t):
            b, jac = _from_arcsine(t, abs(a - c), a + c)
            return density(a, b) * jac

        probs = [[integrate_2d(mapped, rectangle(a0, a1, t0, t1), cfg).value
                  for t0, t1 in zip(te[:-1], te[1:])] for a0, a1 in zip(ae[:-1], ae[1:])]

    elif coordinate == "sides3d":
        ae = _length_edges(bins)
        te = np.linspace(0.0, 1.0, bins + 1)
        t = _arcsine_coord(tri.c, np.abs(tri.a - tri.b), tri.a + tri.b)
        counts, _ = np.histogramdd(np.column_stack([tri.a, tri.b, t]), [ae, ae, te])
        probs = _cell_probs_3d(density, ae, ae, te)

    else:
        raise ValueError(f"unknown coordinate {coordinate!r}")

    return chi2_test(counts, np.asarray(probs), total=len(tri))


def _cell_probs_3d(density, ae, be, te, order=12):
    nodes, weights = gauss_legendre(order)

    def rule(edges):
        lo = edges[:-1, None]
        hi = edges[1:, None]
        x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * nodes
        w = 0.5 * (hi - lo) * weights
        return x, w

    ax, aw = rule(ae)
    bx, bw = rule(be)
    tx, tw = rule(te)
    A = ax[:, None, None, :, None, None]
    B = bx[None, :, None, None, :, None]
    T = tx[None, None, :, None, None, :]
    lo = np.abs(A - B)
    hi = A + B
    c, jac = _from_arcsine(T, lo, hi)
    vals = density(np.broadcast_to(A, c.shape), np.broadcast_to(B, c.shape), c) * jac
    w = aw[:, None, None, :, None, None] * bw[None, :, None, None, :, None] * tw[None, None, :, None, None, :]
    return np.sum(vals * w, axis=(3, 4, 5))
