"""Compare the numba-compiled GRU kernels against the pure-numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeats N]

Times one forward+backward pass over shapes matching the model's three
encoders (full-size configuration) plus the small configuration the tests
train with. numba compilation happens once up front and is excluded.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from talkmoves.numcore import get_kernels

SHAPES = [
    # (label, d_in, d_h, sequence length)
    ("utterance encoder (256 -> 512, 12 tokens)", 256, 512, 12),
    ("dialogue encoder (513 -> 1025, w=5)", 513, 1025, 5),
    ("move encoder (32 -> 64, w=5)", 32, 64, 5),
    ("small test config (16 -> 32, 8 steps)", 16, 32, 8),
]


def bench_pass(fwd, bwd, d_in, d_h, m, repeats, rng):
    W = [np.ascontiguousarray(rng.normal(size=s)) for s in
         [(d_h, d_in)] * 3 + [(d_h, d_h)] * 3 + [(d_h,)] * 3]
    X = rng.normal(size=(m, d_in))
    h0 = np.zeros(d_h)
    grad = rng.normal(size=d_h)
    out = fwd(X, h0, *W)  # warmup / compile
    bwd(X, *out, *W[:6], grad)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fwd(X, h0, *W)
        bwd(X, *out, *W[:6], grad)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=30)
    args = parser.parse_args()

    numpy_k = get_kernels("numpy")
    try:
        numba_k = get_kernels("numba")
    except ImportError:
        print("numba not installed; nothing to compare")
        return

    rng = np.random.default_rng(0)
    print(f"{'shape':<44} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for label, d_in, d_h, m in SHAPES:
        t_np = bench_pass(*numpy_k, d_in, d_h, m, args.repeats, rng)
        t_nb = bench_pass(*numba_k, d_in, d_h, m, args.repeats, rng)
        print(f"{label:<44} {t_np * 1e3:>8.3f}ms {t_nb * 1e3:>8.3f}ms {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
