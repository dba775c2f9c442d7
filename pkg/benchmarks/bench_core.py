"""Benchmark: compiled interior-point core vs the pure-numpy fallback.

Runs the unit-diagonal log-trace SDP solver on random Hermitian instances at
the sizes the phase optimizer produces, checks both backends agree, and
reports per-solve times.

Usage: python benchmarks/bench_core.py [--sizes 9,17,41] [--reps 30]
"""

import argparse
import time

import numpy as np

import srsim  # noqa: F401  (pins BLAS threads)
from srsim.numerics import _elliptope

try:
    from srsim.numerics import _core_cy
except ImportError:
    _core_cy = None


def instance(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    C = a @ a.conj().T / n + 0.3 * np.eye(n)
    b = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    S = (b + b.conj().T) / 4
    return C, S


def time_solver(solver, C, S, reps):
    solver(C, S, 1e-8)  # warm
    t0 = time.perf_counter()
    for _ in range(reps):
        W, obj, info = solver(C, S, 1e-8)
    return (time.perf_counter() - t0) / reps, obj, info["iterations"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="9,17,41")
    ap.add_argument("--reps", type=int, default=30)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    sizes = [int(s) for s in args.sizes.split(",")]
    print(f"{'n':>4} {'pure ms':>9} {'compiled ms':>12} {'speedup':>8} "
          f"{'obj agreement':>14}")
    for n in sizes:
        C, S = instance(rng, n)
        t_pure, obj_pure, it_pure = time_solver(
            _elliptope.elliptope_logsdp, C, S, args.reps)
        if _core_cy is None:
            print(f"{n:>4} {t_pure * 1e3:>9.2f} {'(not built)':>12}")
            continue
        t_cy, obj_cy, it_cy = time_solver(
            _core_cy.elliptope_logsdp, C, S, args.reps)
        print(f"{n:>4} {t_pure * 1e3:>9.2f} {t_cy * 1e3:>12.2f} "
              f"{t_pure / t_cy:>7.2f}x {abs(obj_pure - obj_cy):>14.2e}")


if __name__ == "__main__":
    main()
