#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Times the three hot loops (paired cosine, k-means assignment, logistic SGD)
on synthetic data and reports the speedup plus the largest numeric deviation
between backends.

Usage: python benchmarks/bench_kernels.py [--points 20000] [--dim 64] [--clusters 500]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from curate import _fallback

try:
    from curate import _native
except ImportError:
    _native = None


def timeit(fn, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=20_000)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--clusters", type=int, default=500)
    parser.add_argument("--sgd-epochs", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if _native is None:
        print("compiled kernels not built; run `pip install -e .` first")
        return

    rng = np.random.default_rng(args.seed)
    a32 = rng.normal(size=(args.points, args.dim)).astype(np.float32)
    b32 = rng.normal(size=(args.points, args.dim)).astype(np.float32)
    points = rng.normal(size=(args.points, args.dim))
    centroids = rng.normal(size=(args.clusters, args.dim))
    y = (rng.random(args.points) < 0.5).astype(np.float64)
    order = rng.permutation(args.points).astype(np.int64)

    print(f"{args.points} points, dim {args.dim}, {args.clusters} clusters")
    print(f"{'kernel':<18}{'numpy':>10}{'native':>10}{'speedup':>9}{'max |diff|':>12}")

    t_py, r_py = timeit(lambda: _fallback.cosine_pairs(a32, b32))
    t_nat, r_nat = timeit(lambda: _native.cosine_pairs(a32, b32))
    diff = max(float(np.max(np.abs(p - n))) for p, n in zip(r_py, r_nat))
    print(f"{'cosine_pairs':<18}{t_py:>9.4f}s{t_nat:>9.4f}s{t_py / t_nat:>8.1f}x{diff:>12.2e}")

    t_py, l_py = timeit(lambda: _fallback.assign_nearest(points, centroids))
    t_nat, l_nat = timeit(lambda: _native.assign_nearest(points, centroids))
    mismatch = int(np.count_nonzero(l_py != l_nat))
    print(
        f"{'assign_nearest':<18}{t_py:>9.4f}s{t_nat:>9.4f}s{t_py / t_nat:>8.1f}x"
        f"{mismatch:>11d}L"
    )

    def sgd(impl):
        w = np.zeros(args.dim)
        bias, t = 0.0, 1
        for _ in range(args.sgd_epochs):
            bias, t = impl.logistic_epoch(points, y, order, w, bias, 0.1, 1e-4, t)
        return w

    t_py, w_py = timeit(lambda: sgd(_fallback), repeats=1)
    t_nat, w_nat = timeit(lambda: sgd(_native), repeats=1)
    diff = float(np.max(np.abs(w_py - w_nat)))
    print(f"{'logistic_sgd':<18}{t_py:>9.4f}s{t_nat:>9.4f}s{t_py / t_nat:>8.1f}x{diff:>12.2e}")


if __name__ == "__main__":
    main()
