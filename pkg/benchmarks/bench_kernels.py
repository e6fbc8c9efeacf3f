"""Throughput comparison: compiled kernels vs the pure NumPy fallback.

Usage:
    python benchmarks/bench_kernels.py [--mc-iterations 100000] [--repeats 3]
"""

import argparse
import time

import numpy as np

from modoma import _pure

try:
    from modoma import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def random_distance(rng, n):
    upper = np.triu(rng.random((n, n)), 1)
    return upper + upper.T


def sparse_overlap_table(rng, size, total):
    """Concentrated diagonal plus thin off-diagonal scatter, the shape a
    category-overlap crosstab typically takes."""
    counts = rng.poisson(0.4, size=(size, size))
    diag = rng.multinomial(total, np.full(size, 1 / size))
    counts[np.diag_indices(size)] += diag
    return counts.astype(np.int64)


def row(label, pure_s, compiled_s):
    if compiled_s is None:
        print(f"{label:<34} {pure_s:>10.4f}s {'-':>12} {'-':>9}")
    else:
        print(
            f"{label:<34} {pure_s:>10.4f}s {compiled_s:>11.4f}s "
            f"{pure_s / compiled_s:>8.1f}x"
        )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--mc-iterations", type=int, default=100_000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if _kernels is None:
        print("compiled extension not built; timing the pure backend only\n")

    print(f"{'kernel':<34} {'pure':>11} {'compiled':>12} {'speedup':>9}")

    rng = np.random.default_rng(0)
    for n in (50, 100, 200, 400):
        dist = random_distance(rng, n)
        pure_s = best_of(lambda: _pure.complete_link(dist), args.repeats)
        compiled_s = (
            best_of(lambda: _kernels.complete_link(dist), args.repeats)
            if _kernels
            else None
        )
        row(f"complete_link n={n}", pure_s, compiled_s)

    for size, total in ((2, 40), (8, 120), (14, 220)):
        table = sparse_overlap_table(rng, size, total)
        iterations = args.mc_iterations

        def run(backend, table=table, iterations=iterations):
            backend.mc_extreme_count(table, iterations, np.random.default_rng(1))

        pure_s = best_of(lambda: run(_pure), args.repeats)
        compiled_s = best_of(lambda: run(_kernels), args.repeats) if _kernels else None
        row(f"mc_extreme_count {size}x{size} B={iterations}", pure_s, compiled_s)


if __name__ == "__main__":
    main()
