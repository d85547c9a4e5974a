"""Seeded samplers for pinned, staked, anchored and pure Gaussian triangles.

Vertex placement (labels as in :mod:`gausstri.model`):

* pinned   -- C at the origin, A and B standard Gaussian in R^dim
* staked   -- A = (c, 0), B = (0, 0), C standard Gaussian
* anchored -- A = (c/2, 0), B = (-c/2, 0), C standard Gaussian
* pure     -- A, B, C standard Gaussian in R^dim

Draws that land within the degeneracy threshold are redrawn from the
same stream and counted in ``TriangleBatch.degenerate``.
"""
from dataclasses import dataclass

import numpy as np

from .kernels import triangle_kernel
from .model import FamilySpec, TriangleAngles, TriangleSides

CSV_HEADER = "a,b,c,alpha,beta,gamma,obtuse"
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream identified by ``(seed, stream_id)``."""
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not 0 <= v <= _MASK64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer")

    def generator(self):
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass
class TriangleBatch:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    obtuse: np.ndarray
    degenerate: int = 0

    def __len__(self):
        return self.a.shape[0]

    def sides(self, i):
        return TriangleSides(float(self.a[i]), float(self.b[i]), float(self.c[i]))

    def angles(self, i):
        return TriangleAngles(float(self.alpha[i]), float(self.beta[i]), float(self.gamma[i]))

    def csv_lines(self):
        cols = (self.a, self.b, self.c, self.alpha, self.beta, self.gamma)
        for i in range(len(self)):
            vals = ",".join(format(float(col[i]), ".17g") for col in cols)
            yield f"{vals},{int(self.obtuse[i])}"


def _as_generator(rng):
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or numpy Generator")


def _place(kind, gen, n, dim, c):
    if kind == "pinned":
        z = gen.standard_normal((2, n, dim))
        return z[0], z[1], np.zeros((n, dim))
    if kind == "pure":
        z = gen.standard_normal((3, n, dim))
        return z[0], z[1], z[2]
    pc = gen.standard_normal((n, dim))
    pa = np.zeros((n, dim))
    pb = np.zeros((n, dim))
    if kind == "staked":
        pa[:, 0] = c
    else:
        pa[:, 0] = 0.5 * c
        pb[:, 0] = -0.5 * c
    return pa, pb, pc


def _sample(kind, rng, n, dim, c):
    gen = _as_generator(rng)
    out, obtuse, bad = triangle_kernel(*_place(kind, gen, n, dim, c))
    redrawn = 0
    while bad.any():
        idx = np.flatnonzero(bad)
        redrawn += idx.size
        o2, ob2, bad2 = triangle_kernel(*_place(kind, gen, idx.size, dim, c))
        out[:, idx] = o2
        obtuse[idx] = ob2
        bad[idx] = bad2
    if kind in ("staked", "anchored"):
        out[2, :] = c
    return TriangleBatch(out[0], out[1], out[2], out[3], out[4], out[5], obtuse, redrawn)


def sample_pinned(dim, rng, n=1):
    if dim < 2:
        raise ValueError("dim must be >= 2")
    return _sample("pinned", rng, n, dim, 1.0)


def sample_staked(c, rng, n=1, dim=2):
    if not c > 0:
        raise ValueError("c must be positive")
    return _sample("staked", rng, n, dim, float(c))


def sample_anchored(c, rng, n=1, dim=2):
    if not c > 0:
        raise ValueError("c must be positive")
    return _sample("anchored", rng, n, dim, float(c))


def sample_pure(dim, rng, n=1):
    if dim < 2:
        raise ValueError("dim must be >= 2")
    return _sample("pure", rng, n, dim, 1.0)


def sample_family(spec: FamilySpec, rng, n=1):
    """Dispatch on ``spec.family``. Staked/anchored beyond the plane put the
    fixed vertices on the first axis."""
    return _sample(spec.family, rng, n, spec.dim, float(spec.c))


def chunk_stream(seed, chunk_index):
    return RngStream(seed & _MASK64, chunk_index)


def chunk_sizes(n, chunk_size):
    full, rest = divmod(n, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])
