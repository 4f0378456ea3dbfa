#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the numpy fallback.

Times the two hot kernels (matrix-only radial-return integration and the
full composite Mori-Tanaka step) on representative random strain paths.

    python benchmarks/bench_kernels.py [--rows 201] [--paths 20]
"""
import argparse
import time

import numpy as np

from sfrcnet._kernels import get_backend, pure
from sfrcnet.materials import FiberParams, MatrixParams
from sfrcnet.orientation import average_basis, sample_orientation_tensor


def make_paths(n_paths, n_rows, rng):
    paths = []
    for _ in range(n_paths):
        steps = rng.normal(scale=3e-4, size=(n_rows - 1, 6))
        paths.append(np.vstack([np.zeros(6), np.cumsum(steps, axis=0)]))
    return paths


def bench(label, fn, paths, repeats=3):
    best = np.inf
    for _ in range(repeats):
        tic = time.perf_counter()
        for path in paths:
            fn(path)
        best = min(best, time.perf_counter() - tic)
    per_row = best / (len(paths) * (paths[0].shape[0] - 1))
    print(f"  {label:10s} {best:8.3f} s total   {per_row * 1e6:9.2f} us/step")
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=201)
    ap.add_argument("--paths", type=int, default=20)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    matrix = MatrixParams()
    fiber = FiberParams()
    mat = matrix.as_array()
    cf = fiber.stiffness()
    a = sample_orientation_tensor(rng)
    avg_t = average_basis(a)
    vf, ar = 0.12, fiber.aspect_ratio
    a_el = pure._averaged_concentration(matrix.mu, matrix.k_mod, cf, vf, ar,
                                        avg_t)
    m_el = (np.eye(6) - vf * a_el) / (1.0 - vf)
    rm_tol = 1e-10 * matrix.sigma_y
    paths = make_paths(args.paths, args.rows, rng)

    try:
        backends = [("pure", pure), ("compiled", get_backend("compiled"))]
    except Exception:
        print("compiled backend unavailable; benchmarking pure only")
        backends = [("pure", pure)]

    print(f"matrix-only path integration ({args.paths} paths x "
          f"{args.rows - 1} steps)")
    times = {}
    for name, kern in backends:
        times[name] = bench(name, lambda p, k=kern: k.matrix_path(
            p, mat, rm_tol, 50), paths)
    if len(times) == 2:
        print(f"  speedup    {times['pure'] / times['compiled']:8.1f} x")

    print(f"composite Mori-Tanaka path ({args.paths} paths x "
          f"{args.rows - 1} steps, vf={vf})")
    times = {}
    for name, kern in backends:
        times[name] = bench(name, lambda p, k=kern: k.composite_path(
            p, mat, cf, vf, ar, avg_t, m_el, rm_tol, 50, 1e-13, 100), paths)
    if len(times) == 2:
        print(f"  speedup    {times['pure'] / times['compiled']:8.1f} x")


if __name__ == "__main__":
    main()
