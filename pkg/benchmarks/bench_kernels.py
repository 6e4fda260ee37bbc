"""Time the compiled kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--N 20000] [--grid 2048] [--repeat 3]

Both paths are checked to agree before timing.  The first numba call is
reported separately since it includes JIT compilation.  With
FDL_BACKEND=numpy the dispatch column is the numpy path too.
"""

import argparse
import time

import numpy as np

from fdl import _accel
from fdl.spectrum import geometric_checkpoints


def best_of(fn, repeat):
    t = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        t.append(time.perf_counter() - t0)
    return min(t)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=20000)
    ap.add_argument("--grid", type=int, default=2048)
    ap.add_argument("--points", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=3)
    a = ap.parse_args()

    rng = np.random.default_rng(0)
    pos = rng.standard_normal(a.N + 1) + 1j * rng.standard_normal(a.N + 1)
    neg = rng.standard_normal(a.N + 1) + 1j * rng.standard_normal(a.N + 1)
    ms = np.arange(a.grid)
    cps = geometric_checkpoints(a.N)
    xs = rng.random(a.points)

    print(f"backend in use: {_accel.BACKEND}")
    cases = {
        "profile_grid": (lambda: _accel.profile_grid(pos, neg, a.grid, ms, cps),
                         lambda: _accel.profile_grid_numpy(pos, neg, a.grid, ms, cps)),
        "window_eval": (lambda: _accel.window_eval(pos, 0, xs),
                        lambda: _accel.window_eval_numpy(pos, 0, xs)),
    }
    print(f"{'kernel':14s} {'first call':>11s} {'dispatch':>10s} {'numpy':>10s} {'speedup':>8s}")
    for name, (fast, slow) in cases.items():
        t0 = time.perf_counter()
        r_fast = fast()
        first = time.perf_counter() - t0
        r_slow = slow()
        for u, v in zip(np.atleast_1d(r_fast) if name == "window_eval" else r_fast,
                        np.atleast_1d(r_slow) if name == "window_eval" else r_slow):
            assert np.allclose(u, v, rtol=1e-8, atol=1e-8), name
        tf, ts = best_of(fast, a.repeat), best_of(slow, a.repeat)
        print(f"{name:14s} {first:10.3f}s {tf:9.3f}s {ts:9.3f}s {ts / tf:7.1f}x")


if __name__ == "__main__":
    main()
