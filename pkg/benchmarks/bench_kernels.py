#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Times the two hot paths on representative workloads:

* overlap structure scan: fills the waiting-time linear systems; cost grows
  with the square of the pattern-family size,
* simulation batch: per-step stepping of many seeded replications.

Run:  python benchmarks/bench_kernels.py
"""

import importlib
import time

import numpy as np

from scanwait.kernels import pure
from scanwait.patterns import enumerate_patterns

try:
    _ckernels = importlib.import_module("scanwait.kernels._ckernels")
except ImportError:
    _ckernels = None


def _time(fn, *args, repeat=3, **kwargs):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args, **kwargs)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_structure(w, s):
    ps = enumerate_patterns(w, s)
    flat, offsets = ps.packed
    t_pure, ref = _time(pure.overlap_structure, flat, offsets)
    line = f"overlap_structure (w={w}, s={s}, N={len(ps)}): pure {t_pure * 1e3:9.1f} ms"
    if _ckernels is not None:
        t_c, got = _time(_ckernels.overlap_structure, flat, offsets)
        same = all(np.array_equal(a, b) for a, b in zip(ref, got))
        line += f"   compiled {t_c * 1e3:9.2f} ms   speedup {t_pure / t_c:7.1f}x   identical={same}"
    print(line)


def bench_sim(w, s, p, runs, seed=20240817):
    t_pure, ref = _time(pure.simulate_batch, w, s, p, runs, seed, repeat=1)
    line = f"simulate_batch   (w={w}, s={s}, p={p}, runs={runs}): pure {t_pure * 1e3:7.1f} ms"
    if _ckernels is not None:
        t_c, got = _time(_ckernels.simulate_batch, w, s, p, runs, seed, repeat=1)
        same = np.array_equal(ref[0], got[0]) and np.array_equal(ref[1], got[1])
        line += f"   compiled {t_c * 1e3:9.2f} ms   speedup {t_pure / t_c:7.1f}x   identical={same}"
    print(line)


def main():
    if _ckernels is None:
        print("compiled extension not available; timing the pure backend only\n")
    bench_structure(10, 3)
    bench_structure(12, 4)
    bench_structure(18, 4)
    bench_structure(24, 4)
    print()
    bench_sim(6, 2, 0.2, 20_000)
    bench_sim(8, 3, 0.4, 20_000)
    bench_sim(10, 4, 0.5, 20_000)


if __name__ == "__main__":
    main()
