"""Benchmark: compiled sampling kernel vs the pure-Python/numpy fallback.

Times the two kernel entry points (uniform generation, inverse-CDF sampling)
and an end-to-end Monte Carlo transform forced onto each backend.

Run:  python3 benchmarks/bench_kernel.py
"""

import time

import numpy as np

from boundarywalk import _backend, _kernel_py
from boundarywalk.paths import SeededStream
from boundarywalk.stopping import FirstIncrementRule, monte_carlo_transform
from boundarywalk.walks import lattice_srw

try:
    from boundarywalk import _kernel  # compiled extension

    BACKENDS = [("compiled", _kernel), ("python", _kernel_py)]
except ImportError:
    BACKENDS = [("python", _kernel_py)]


def timeit(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels():
    key = _kernel_py.stream_key(1, 0)
    counters = np.arange(1, 2_000_001, dtype=np.uint64)
    cdf = np.cumsum(np.full(16, 1 / 16))
    cdf[-1] = 1.0
    print(f"selected backend: {_backend.BACKEND}")
    print(f"\nfill_uniforms, {len(counters):,} draws")
    base = None
    for name, mod in BACKENDS:
        t = timeit(lambda m=mod: m.fill_uniforms(key, counters))
        base = base or t
        print(f"  {name:9s} {t * 1e3:8.2f} ms   ({t / base:4.2f}x)")
    print(f"\nsample_indices, {len(counters):,} draws over a 16-point table")
    base = None
    for name, mod in BACKENDS:
        t = timeit(lambda m=mod: m.sample_indices(key, counters, cdf))
        base = base or t
        print(f"  {name:9s} {t * 1e3:8.2f} ms   ({t / base:4.2f}x)")


def bench_transform():
    mu = lattice_srw(1)
    rule = FirstIncrementRule(mu.group, [(-1,)])
    samples = 200_000
    print(f"\nmonte_carlo_transform, {samples:,} paths (first-increment on Z)")
    saved = (_backend.fill_uniforms, _backend.sample_indices)
    base = None
    results = {}
    try:
        for name, mod in BACKENDS:
            _backend.fill_uniforms = mod.fill_uniforms
            _backend.sample_indices = mod.sample_indices
            run = lambda: monte_carlo_transform(mu, rule, samples, stream=SeededStream(0))
            t = timeit(run, repeats=3)
            results[name] = run()
            base = base or t
            print(f"  {name:9s} {t * 1e3:8.2f} ms   ({t / base:4.2f}x)")
    finally:
        _backend.fill_uniforms, _backend.sample_indices = saved
    if len(results) == 2:
        same = results["compiled"].measure == results["python"].measure
        print(f"\nbackends produce identical histograms: {same}")


if __name__ == "__main__":
    bench_kernels()
    bench_transform()
