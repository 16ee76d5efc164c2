"""Compiled vs pure-numpy propagation kernels.

Run ``python benchmarks/bench_kernels.py``; prints one line per problem size
with both timings, the speed-up and the largest entry difference.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from silab import _kernels_py

try:
    from silab import _kernels
except ImportError:  # pragma: no cover - extension not built
    _kernels = None


def problem(d: int, steps: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    n = d // 2
    J = np.block([[np.zeros((n, n)), -np.eye(n)], [np.eye(n), np.zeros((n, n))]])
    t = np.linspace(0.0, 1.0, 2 * steps + 1)
    S = rng.normal(size=(d, d))
    B = (S @ S.T)[None] + np.cos(2 * np.pi * t)[:, None, None] * np.eye(d)
    return np.ascontiguousarray(J @ B), 1.0 / steps, np.eye(d)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not available; build with `pip install -e . --no-build-isolation`")
        return 1
    print(f"{'d':>3} {'steps':>7} {'python ms':>10} {'cython ms':>10} {'speed-up':>9} {'max diff':>10}")
    for d in (2, 4, 6):
        for steps in (1024, 4096, 16384):
            A, h, Y0 = problem(d, steps)
            tp = min(timeit.repeat(lambda: _kernels_py.rk4_fundamental(A, h, Y0), number=1, repeat=args.repeat))
            tc = min(timeit.repeat(lambda: _kernels.rk4_fundamental(A, h, Y0), number=1, repeat=args.repeat))
            diff = np.abs(_kernels_py.rk4_fundamental(A, h, Y0) - _kernels.rk4_fundamental(A, h, Y0)).max()
            print(f"{d:>3} {steps:>7} {tp * 1e3:>10.2f} {tc * 1e3:>10.2f} {tp / tc:>9.1f} {diff:>10.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
