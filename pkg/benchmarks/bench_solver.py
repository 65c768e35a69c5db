#!/usr/bin/env python3
"""Timing comparison of the coordinate-descent sweep kernels.

Runs the compiled (Cython) sweep and the pure-Python fallback on the same
synthetic problems and reports microseconds per sweep. The kernels share
their arithmetic exactly, so the final iterates are checked for bitwise
equality before any number is printed.

Usage:
    python3 benchmarks/bench_solver.py
    python3 benchmarks/bench_solver.py --sizes 50,200,800 --sweeps 100
"""

import argparse
import math
import time

import numpy as np

from hazlasso import _cd_py

try:
    from hazlasso import _cd_fast
except ImportError:
    _cd_fast = None


def make_problem(M, rng):
    """Dense well-conditioned system where no coordinate thresholds to zero.

    Tiny weights keep every coordinate live across sweeps, so each sweep
    pays the full O(M^2) gradient-update cost; that is the path worth
    timing.
    """
    A = rng.standard_normal((4 * M, M)) / math.sqrt(4 * M)
    H = np.ascontiguousarray(A.T @ A + 0.05 * np.eye(M))
    beta_true = rng.standard_normal(M)
    hn = np.ascontiguousarray(H @ beta_true + 0.01 * rng.standard_normal(M))
    w = np.full(M, 1e-4)
    dead = np.zeros(M, dtype=np.uint8)
    return H, hn, w, dead


def run_sweeps(kernel, problem, sweeps):
    """Time `sweeps` sweeps from a cold start; returns (seconds, beta)."""
    H, hn, w, dead = problem
    M = len(hn)
    beta = np.zeros(M)
    g = np.zeros(M)
    start = time.perf_counter()
    for _ in range(sweeps):
        kernel.cd_sweep(H, hn, w, 1.0, beta, g, dead, 0)
    return time.perf_counter() - start, beta


def best_time(kernel, problem, sweeps, repeats):
    best = math.inf
    beta = None
    for _ in range(repeats):
        elapsed, beta = run_sweeps(kernel, problem, sweeps)
        best = min(best, elapsed)
    return best, beta


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--sizes", default="25,50,100,200,400", help="comma-separated problem sizes M"
    )
    parser.add_argument("--sweeps", type=int, default=200, help="sweeps per timing run")
    parser.add_argument(
        "--repeats", type=int, default=5, help="timing runs per size; best is reported"
    )
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(args.seed)

    if _cd_fast is None:
        print("compiled kernel not built; timing the python fallback only")
    print(f"{'M':>6} {'python us/sweep':>16} {'compiled us/sweep':>18} {'speedup':>8}")
    for M in sizes:
        problem = make_problem(M, rng)
        t_py, beta_py = best_time(_cd_py, problem, args.sweeps, args.repeats)
        per_py = 1e6 * t_py / args.sweeps
        if _cd_fast is None:
            print(f"{M:>6} {per_py:>16.2f} {'-':>18} {'-':>8}")
            continue
        t_c, beta_c = best_time(_cd_fast, problem, args.sweeps, args.repeats)
        if not np.array_equal(beta_py, beta_c):
            raise AssertionError(f"kernels disagree at M={M}")
        per_c = 1e6 * t_c / args.sweeps
        print(f"{M:>6} {per_py:>16.2f} {per_c:>18.2f} {t_py / t_c:>7.1f}x")


if __name__ == "__main__":
    main()
