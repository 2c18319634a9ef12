"""Benchmark the compiled distance kernel against the pure-numpy fallback.

Run from the repository root:

    python benchmarks/bench_kernels.py [--sizes 8,32,128,512] [--repeats 5]

Both backends are checked for agreement before timing; the table reports
the best-of-N wall time per call and the speedup of the active backend
over the numpy reference.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from matnav._kernels import (
    BACKEND,
    min_image_distance_matrix,
    min_image_distance_matrix_numpy,
)


def _case(rng: np.random.Generator, n: int):
    frac = rng.random((n, 3))
    basis = np.diag(rng.uniform(3.0, 9.0, 3)) + rng.normal(0.0, 0.4, (3, 3))
    return frac, basis


def _best_time(fn, frac, basis, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(frac, basis)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="8,32,128,512", help="comma-separated site counts")
    parser.add_argument("--repeats", type=int, default=5, help="timing repeats per size")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(args.seed)

    print(f"active backend: {BACKEND}")
    if BACKEND == "numpy":
        print("compiled extension unavailable; timing the fallback against itself")

    print(f"{'n_sites':>8} {'active (ms)':>12} {'numpy (ms)':>12} {'speedup':>8}")
    for n in sizes:
        frac, basis = _case(rng, n)
        active = min_image_distance_matrix(frac, basis)
        reference = min_image_distance_matrix_numpy(frac, basis)
        if not np.allclose(active, reference, rtol=0.0, atol=1e-12):
            raise SystemExit(f"backend disagreement at n={n}")
        t_active = _best_time(min_image_distance_matrix, frac, basis, args.repeats)
        t_numpy = _best_time(min_image_distance_matrix_numpy, frac, basis, args.repeats)
        print(
            f"{n:>8} {t_active * 1e3:>12.3f} {t_numpy * 1e3:>12.3f} "
            f"{t_numpy / t_active:>7.1f}x"
        )


if __name__ == "__main__":
    main()
