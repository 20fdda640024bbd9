"""Timing comparison of the compiled kernels against the numpy fallback.

Run as `python3 benchmarks/kernel_benchmark.py`. Both backends are imported
directly, so this works regardless of which one the package selected.
"""

import time

import numpy as np

from np_universal import _kernels_py


def _load_compiled():
    try:
        from np_universal import _kernels
    except ImportError:
        return None
    return _kernels


def best_of(fn, repeats=5):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def batch_cases(rng):
    dim = 3
    freqs = rng.multinomial(200, np.full(dim, 1.0 / dim), size=200_000) / 200.0
    p0 = np.array([0.3, 0.3, 0.4])
    p1 = np.array([0.35, 0.35, 0.3])
    llr = np.log(p1 / p0)
    logp0 = np.log(p0)
    tprime = rng.dirichlet(np.ones(dim), size=freqs.shape[0]) * 0.999 + 1e-3 / dim
    logt = np.log(tprime)
    yield "lrt_statistics", lambda k: k.lrt_statistics(freqs, llr)
    yield "glrt_statistics", lambda k: k.glrt_statistics(freqs, logp0)
    yield "interp_statistics", lambda k: k.interp_statistics(freqs, logp0, logt, 1.0)
    yield "gjs_statistics", lambda k: k.gjs_statistics(freqs, tprime, 2.0)


def seq_case(rng):
    dim = 2
    steps = 100_000
    test = rng.integers(0, dim, steps).astype(np.int64)
    take = np.diff(np.arange(0, 10 * (steps + 1), 10)).astype(np.int64)
    train = rng.integers(0, dim, int(take.sum())).astype(np.int64)
    p0 = np.array([0.45, 0.55])
    logp0 = np.log(p0)

    def run(k):
        # threshold never crossed here (test data is fair-coin), so the whole
        # segment is traversed; counts are reset every call
        cx = np.zeros(dim, np.int64)
        cX = np.zeros(dim, np.int64)
        k.seq_segment(cx, cX, test, train, take, p0, logp0, steps + 1,
                      1e-4, 0.0, 0)

    return "seq_segment", run


def main():
    compiled = _load_compiled()
    rng = np.random.default_rng(0)
    cases = list(batch_cases(rng)) + [seq_case(rng)]
    print(f"{'kernel':<20} {'python':>12} {'compiled':>12} {'speedup':>9}")
    for name, call in cases:
        t_py = best_of(lambda: call(_kernels_py))
        if compiled is None:
            print(f"{name:<20} {t_py * 1e3:>10.2f}ms {'n/a':>12} {'n/a':>9}")
            continue
        t_c = best_of(lambda: call(compiled))
        print(f"{name:<20} {t_py * 1e3:>10.2f}ms {t_c * 1e3:>10.2f}ms "
              f"{t_py / t_c:>8.1f}x")
    if compiled is None:
        print("compiled backend unavailable; install with a working C compiler")


if __name__ == "__main__":
    main()
