"""Throughput comparison of the numba and numpy hot-path backends.

The measured step is the Monte Carlo bottleneck: a stack of complex
receiver frames -> covariance eigenvalues. Run:

    python benchmarks/bench_backends.py [--trials 20000] [--repeats 3]

Both backends consume identical inputs; the table reports the best wall
time per backend and the relative speedup.
"""

import argparse
import os
import time

import numpy as np


def make_frames(trials, k, n, seed=0):
    rng = np.random.default_rng(seed)
    frames = (
        rng.standard_normal((trials, k, n)) + 1j * rng.standard_normal((trials, k, n))
    ) * np.sqrt(0.5 / n)
    return np.ascontiguousarray(frames, dtype=np.complex128)


def bench(fn, frames, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(frames)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=20_000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    os.environ.pop("WIDESENSE_BACKEND", None)
    from widesense import backends

    if not backends.NUMBA_AVAILABLE:
        raise SystemExit("numba is not importable; nothing to compare")

    from widesense._kernels import batch_cov_eigvals as numba_kernel

    def numba_path(frames):
        eigs, ok = numba_kernel(frames)
        assert ok
        return eigs

    numpy_path = backends._cov_eigvals_numpy

    cases = [
        ("K=7  N=100", args.trials, 7, 100),
        ("K=16 N=64", args.trials // 2, 16, 64),
        ("K=50 N=500", max(args.trials // 100, 50), 50, 500),
    ]

    # compile outside the timed region
    numba_path(make_frames(4, 7, 100))

    print(f"{'case':<12} {'trials':>8} {'numba [s]':>10} {'numpy [s]':>10} {'speedup':>8}")
    for label, trials, k, n in cases:
        frames = make_frames(trials, k, n)
        ref = numpy_path(frames)
        got = numba_path(frames)
        err = np.max(np.abs(got - ref)) / max(np.max(np.abs(ref)), 1e-30)
        assert err < 1e-10, f"backend mismatch: {err:.2e}"
        t_numba = bench(numba_path, frames, args.repeats)
        t_numpy = bench(numpy_path, frames, args.repeats)
        print(
            f"{label:<12} {trials:>8} {t_numba:>10.3f} {t_numpy:>10.3f} "
            f"{t_numpy / t_numba:>7.2f}x"
        )


if __name__ == "__main__":
    main()
