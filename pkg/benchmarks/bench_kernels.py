"""Timing comparison of the jitted kernels versus the pure-numpy path.

Run: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from handover_mpc import _kernels, config
from handover_mpc.accel import _np_se_kernel_matrix, _np_se_kernel_vec

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


def timeit(fn, *args, repeat=200):
    fn(*args)  # warm / compile
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=200)
    args = parser.parse_args()

    chain = config.default_chain()
    rng = np.random.default_rng(0)
    q = rng.uniform(-1.5, 1.5, 7)
    Xa = rng.normal(size=(400, 6))
    Xb = rng.normal(size=(400, 6))
    x_star = rng.normal(size=6)
    ls = np.array([0.3, 0.3, 0.3, 1.5, 1.5, 1.5])

    rows = []

    def bench(name, numpy_fn, numpy_args, jit_src, jit_args, repeat):
        t_np = timeit(numpy_fn, *numpy_args, repeat=repeat)
        if HAS_NUMBA:
            jfn = njit(cache=True)(jit_src)
            t_jit = timeit(jfn, *jit_args, repeat=repeat)
        else:
            t_jit = float("nan")
        rows.append((name, t_np * 1e6, t_jit * 1e6, t_np / t_jit if HAS_NUMBA else float("nan")))

    fk_args = (chain.alpha, chain.a, chain.d, chain.theta_offset, q)
    bench("mdh_frames (7 joints)", _kernels.mdh_frames_impl, fk_args, _kernels.mdh_frames_impl, fk_args, args.repeat * 5)
    bench(
        "se_kernel_matrix (400x400)",
        _np_se_kernel_matrix,
        (Xa, Xb, ls, 0.05),
        _kernels.se_kernel_matrix_impl,
        (Xa, Xb, ls, 0.05),
        max(args.repeat // 10, 5),
    )
    bench(
        "se_kernel_vec (400)",
        _np_se_kernel_vec,
        (Xa, x_star, ls, 0.05),
        _kernels.se_kernel_vec_impl,
        (Xa, x_star, ls, 0.05),
        args.repeat * 5,
    )

    print(f"{'kernel':32s} {'numpy us':>12s} {'numba us':>12s} {'speedup':>9s}")
    for name, t_np, t_jit, speedup in rows:
        print(f"{name:32s} {t_np:12.1f} {t_jit:12.1f} {speedup:8.1f}x")


if __name__ == "__main__":
    main()
