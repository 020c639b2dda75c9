#!/usr/bin/env python3
"""Compare the compiled kernels with the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--grid N]
"""

import argparse
import time

import numpy as np

from schroeder_lab.dynamics import RationalMap
from schroeder_lab.schroeder import schroeder_coefficients
from schroeder_lab.kernels import _fallback

try:
    from schroeder_lab.kernels import _core
except ImportError:
    _core = None


def timeit(fn, *args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--grid", type=int, default=512)
    args = ap.parse_args()
    n = args.grid

    series = schroeder_coefficients(RationalMap([-2, 0, 1]), 2.0, order=64)
    xs = np.linspace(-40, 40, n)
    W = np.ascontiguousarray((xs[None, :] + 1j * xs[:, None]).ravel())
    ph, pr, qh, qr = series.fmap.hom_coeffs
    pull_args = (np.ascontiguousarray(series.coeffs), series.multiplier,
                 series.r_safe, ph, pr, qh, qr, series.period, W)
    fc = np.ascontiguousarray(series.fmap.num)
    esc_z = np.ascontiguousarray(W / 10.0)
    cgrid = np.ascontiguousarray(
        (np.linspace(-2.5, 1.5, n)[None, :] + 1j * np.linspace(-2, 2, n)[:, None]).ravel()
    )

    cases = [
        ("pullback_eval", "pullback_eval", pull_args),
        ("pullback_log_abs", "pullback_log_abs",
         (pull_args[0], pull_args[1], pull_args[2], fc, 1, W)),
        ("escape_time", "escape_time", (fc, esc_z, 120, 1e6)),
        ("power_escape", "power_escape", (2, cgrid, 200, 4.0)),
    ]

    print(f"grid {n}x{n} = {n * n} points per kernel call")
    print(f"{'kernel':<18} {'python':>10} {'cython':>10} {'speedup':>8}")
    for name, attr, a in cases:
        t_py = timeit(getattr(_fallback, attr), *a)
        if _core is None:
            print(f"{name:<18} {t_py:>9.3f}s {'n/a':>10} {'-':>8}")
            continue
        t_cy = timeit(getattr(_core, attr), *a)
        print(f"{name:<18} {t_py:>9.3f}s {t_cy:>9.3f}s {t_py / t_cy:>7.1f}x")


if __name__ == "__main__":
    main()
