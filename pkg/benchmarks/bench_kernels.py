#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Runs each hot kernel on a representative workload with identical inputs on
both backends and prints a timing table. The numba path is warmed once so
JIT compilation is not measured.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from clusterboot.kernels import get_backend


def _workloads(rng):
    # dataset shaped like the large Monte Carlo runs: K=200, n_k=8
    K, n = 200, 8
    sizes = np.full(K, n, dtype=np.int64)
    starts = (np.arange(K) * n).astype(np.int64)
    values = rng.normal(0.0, 1.0, K * n)
    mu = values.reshape(K, n).mean(axis=1)
    vh = values.reshape(K, n).var(axis=1, ddof=1)
    w = sizes / sizes.sum()
    cumw = np.cumsum(sizes) / sizes.sum()
    cumw[-1] = 1.0
    B = 999
    u_b1 = rng.random((B, K))
    u_b2 = rng.random((B, K * n))
    uslot = rng.random((B, K))
    uwin = rng.random((B, K, n - 1))

    return [
        ("population_summaries",
         lambda m: m.population_summaries(values, starts, sizes), 200),
        ("estimator_scalars",
         lambda m: m.estimator_scalars(mu, vh, sizes.astype(float)), 500),
        ("b1_replicates (B=999, K=200)",
         lambda m: m.b1_replicates(mu, w, cumw, u_b1), 20),
        ("b2_replicates (B=999, N=1600)",
         lambda m: m.b2_replicates(values, starts, sizes, u_b2), 5),
        ("b3_replicates (B=999, K=200)",
         lambda m: m.b3_replicates(values, starts, sizes, w, uslot, uwin), 5),
    ]


def bench(repeat):
    rng = np.random.default_rng(0)
    loads = _workloads(rng)
    backends = {}
    for name in ("numpy", "numba"):
        try:
            backends[name] = get_backend(name)
        except Exception as e:
            print(f"note: backend {name} unavailable ({e})")
    for name, fn, _ in loads:  # warm the JIT outside the timers
        for mod in backends.values():
            fn(mod)

    print(f"{'kernel':38s}" + "".join(f"{b:>12s}" for b in backends)
          + f"{'speedup':>10s}")
    for name, fn, inner in loads:
        best = {}
        for bname, mod in backends.items():
            times = []
            for _ in range(repeat):
                t0 = time.perf_counter()
                for _ in range(inner):
                    fn(mod)
                times.append((time.perf_counter() - t0) / inner)
            best[bname] = min(times)
        row = f"{name:38s}"
        for bname in backends:
            row += f"{best[bname] * 1e3:10.3f}ms"
        if len(best) == 2:
            row += f"{best['numpy'] / best['numba']:9.1f}x"
        print(row)


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    bench(ap.parse_args().repeat)
