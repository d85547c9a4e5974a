"""Time the numba loop kernels against their numpy array forms.

    python benchmarks/bench_kernels.py [--n 1000000] [--repeat 5]

The first numba call compiles (or loads the on-disk cache); that cost is
reported separately from the steady-state timings.
"""
import argparse
import time

import numpy as np

from gausstri import kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_triangles(n, repeat, rng):
    pa = rng.standard_normal((n, 2))
    pb = rng.standard_normal((n, 2))
    pc = np.zeros((n, 2))
    t0 = time.perf_counter()
    kernels.triangle_kernel_loop(pa, pb, pc)
    warm = time.perf_counter() - t0
    loop = best_of(lambda: kernels.triangle_kernel_loop(pa, pb, pc), repeat)
    vec = best_of(lambda: kernels.triangle_kernel_numpy(pa, pb, pc), repeat)
    a = kernels.triangle_kernel_loop(pa, pb, pc)[0]
    b = kernels.triangle_kernel_numpy(pa, pb, pc)[0]
    return warm, loop, vec, float(np.max(np.abs(a - b)))


def bench_corr_rice(n, repeat, rng, rho=0.5):
    a = rng.uniform(0.05, 5.0, n)
    b = rng.uniform(0.05, 5.0, n)
    args = (rho, False, 1e-14, 500, 1e6)
    t0 = time.perf_counter()
    kernels.corr_rice_kernel_loop(a, b, *args)
    warm = time.perf_counter() - t0
    loop = best_of(lambda: kernels.corr_rice_kernel_loop(a, b, *args), repeat)
    vec = best_of(lambda: kernels.corr_rice_kernel_numpy(a, b, *args), repeat)
    x = kernels.corr_rice_kernel_loop(a, b, *args)[0]
    y = kernels.corr_rice_kernel_numpy(a, b, *args)[0]
    return warm, loop, vec, float(np.max(np.abs(x - y) / np.maximum(np.abs(y), 1e-300)))


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--rice-n", type=int, default=20_000)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    rng = np.random.default_rng(0)

    print(f"{'kernel':<22}{'points':>10}{'first call':>12}{'numba':>10}{'numpy':>10}{'speedup':>9}{'max gap':>11}")
    for name, n, fn in (("triangles", args.n, bench_triangles), ("correlated Rice", args.rice_n, bench_corr_rice)):
        warm, loop, vec, gap = fn(n, args.repeat, rng)
        print(f"{name:<22}{n:>10}{warm:>11.3f}s{loop:>9.4f}s{vec:>9.4f}s{vec / loop:>8.1f}x{gap:>11.1e}")


if __name__ == "__main__":
    main()
