"""Timing of the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--n 2000] [--repeat 20]

Also times a full Delaunay run on a marked torus under each backend.
"""

import argparse
import time

import numpy as np

from affsurf.delaunay import decomposition, disks
from affsurf.delaunay._kernels import kernels
from affsurf.surface_kernel import build_flat_torus


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_cases(n, rng):
    q = rng.normal(size=(2, n))
    a, b = rng.normal(size=(2, n // 10)), rng.normal(size=(2, n // 10))
    return {
        "depth": (q[0], q[1], 0.1, -0.2, 1.3),
        "pencil": (q[0], q[1], 0.0, 0.1, 0.6, 0.8, 0.25),
        "nested": (q[0], q[1], 0.0, 0.0, 0.0, 1.0),
        "crossings": (a[0], a[1], b[0], b[1], a[0], a[1], b[0], b[1], 1e-12),
    }


def delaunay_run(backend):
    saved = decomposition.kernels, disks.kernels
    decomposition.kernels = disks.kernels = lambda: kernels(backend)
    try:
        s = build_flat_torus(1.3, 0.2 + 1.1j, [0, 0.4 + 0.3j, 0.9 + 0.7j, 0.2 + 0.8j, 0.6 + 0.1j])
        return decomposition.components(s)
    finally:
        decomposition.kernels, disks.kernels = saved


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--repeat", type=int, default=20)
    args = p.parse_args()
    rng = np.random.default_rng(0)
    nb, npy = kernels("numba"), kernels("numpy")
    if nb is npy:
        print("numba unavailable: only the numpy kernels are present")
    cases = kernel_cases(args.n, rng)
    for name, call in cases.items():
        nb[name](*call)  # compile outside the timing
        t_nb = best_of(lambda: nb[name](*call), args.repeat)
        t_np = best_of(lambda: npy[name](*call), args.repeat)
        print(f"{name:10s} numba {t_nb * 1e6:9.1f} us   numpy {t_np * 1e6:9.1f} us   ratio {t_np / t_nb:6.2f}")
    for backend in ("numba", "numpy"):
        t = best_of(lambda: delaunay_run(backend), 3)
        print(f"delaunay   {backend:6s} {t * 1e3:9.1f} ms")


if __name__ == "__main__":
    main()
