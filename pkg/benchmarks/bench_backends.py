#!/usr/bin/env python3
"""Benchmark the numba kernel lane against the pure-numpy fallback.

Times the three hot kernels (field gradients, pairwise distances, witness
edge values) on both lanes and prints a comparison table. The numba lane is
what the package uses by default; the numpy lane is the portability
fallback selected by TOPODENOISE_BACKEND=numpy.

Usage: python benchmarks/bench_backends.py [--repeats 5] [--quick]
"""

import argparse
import time

import numpy as np

import topodenoise as td
from topodenoise import _backend


def best_of(fn, repeats):
    fn()  # warm-up (jit compilation on the numba lane)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(quick):
    rng = np.random.default_rng(0)
    sizes = [(1_000, 100), (10_000, 100)] if quick else \
        [(1_000, 100), (10_000, 100), (100_000, 100), (10_000, 500)]
    for n, m in sizes:
        data = rng.standard_normal((n, 2))
        s = rng.standard_normal((m, 2))
        yield (f"field_gradients N={n:>6} M={m}",
               lambda k, d=data, ss=s: k.field_gradients(ss, d, ss, 0.5, 0.1))
    for n in ([400] if quick else [400, 1500]):
        pts = rng.standard_normal((n, 3))
        yield (f"self_distances  n={n:>6}",
               lambda k, p=pts: k.self_distances(p))
    for w, l in ([(2_000, 100)] if quick else [(2_000, 100), (10_000, 100)]):
        wl = np.abs(rng.standard_normal((w, l))) + 0.1
        slack = np.abs(rng.standard_normal(w)) * 0.05
        yield (f"witness_edges   W={w:>6} L={l}",
               lambda k, a=wl, b=slack: k.witness_edge_values(a, b))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()

    lanes = td.available_backends()
    if "numba" not in lanes:
        print("numba lane unavailable; nothing to compare")
        return

    print(f"{'kernel':<32} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for label, make in cases(args.quick):
        times = {}
        for lane in ("numba", "numpy"):
            td.set_backend(lane)
            kern = _backend.kernels()
            times[lane] = best_of(lambda: make(kern), args.repeats)
        print(f"{label:<32} {times['numba']*1e3:>8.2f}ms "
              f"{times['numpy']*1e3:>8.2f}ms {times['numpy']/times['numba']:>7.1f}x")


if __name__ == "__main__":
    main()
