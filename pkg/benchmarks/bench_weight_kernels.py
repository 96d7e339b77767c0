"""Benchmark the RK4 weight-step kernel: jitted vs pure-numpy path.

Run with no arguments; reports per-call times for a few dimensions.
Set QSCHOTTKY_NO_NUMBA=1 to confirm the numpy fallback is what you get
when numba is unavailable.
"""

import time

import numpy as np

from qschottky._kernels import (
    USING_NUMBA,
    rk4_weight_step,
    rk4_weight_step_numpy,
)


def bench(fn, p, e, dt, n_calls):
    # warm up (triggers compilation on the jitted path)
    fn(p, e, dt, 1.0, 1.0, 0.5, 1.0, 1.5, 1.0, True, True, False)
    t0 = time.perf_counter()
    for _ in range(n_calls):
        fn(p, e, dt, 1.0, 1.0, 0.5, 1.0, 1.5, 1.0, True, True, False)
    return (time.perf_counter() - t0) / n_calls


def main():
    rng = np.random.default_rng(0)
    n_calls = 20000
    print(f"numba active in package: {USING_NUMBA}")
    print(f"{'dim':>4} {'numpy [us]':>12} {'active [us]':>12} {'speedup':>8}")
    for dim in (2, 4, 8, 16, 32):
        p = rng.dirichlet(np.ones(dim) * 3.0)
        e = np.sort(rng.uniform(0.0, 2.0, dim))
        t_np = bench(rk4_weight_step_numpy, p, e, 1e-3, n_calls // 4)
        t_active = bench(rk4_weight_step, p, e, 1e-3, n_calls)
        print(f"{dim:>4} {t_np * 1e6:>12.2f} {t_active * 1e6:>12.2f} "
              f"{t_np / t_active:>8.2f}x")


if __name__ == "__main__":
    main()
