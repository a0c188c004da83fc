"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from bmcarpet import kernels

BAND_CASES = [
    # (up, down, width, steps): P = 1/2 with K0 = 30, and P = 981/2500 with K0 = 100 at M = 10^4
    (1, 1, 59, 10_000),
    (1519, 981, 249_999, 10_000),
]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = sorted(kernels.BACKENDS)
    print(f"default backend: {kernels.BACKEND}; available: {', '.join(backends)}")

    for case in BAND_CASES:
        row = []
        values = []
        for b in backends:
            t, v = best_of(lambda: kernels.band_walk_log_total(*case, backend=b), args.repeat)
            row.append(f"{b} {t:8.3f} s")
            values.append(v)
        spread = max(values) - min(values)
        print(f"band_walk {case}: " + " | ".join(row) + f"  (max diff {spread:.2e})")

    rng = np.random.default_rng(0)
    runs = rng.integers(0, 2, size=2_000_000)
    row = []
    for b in backends:
        t, _ = best_of(lambda: kernels.forward_run_lengths(runs, backend=b), args.repeat)
        row.append(f"{b} {t:8.3f} s")
    print("forward_run_lengths (2e6 symbols): " + " | ".join(row))
    if "cython" not in backends:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
