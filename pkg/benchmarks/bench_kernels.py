"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both backends live in ``wsobolev.kernels`` regardless of the
WSOBOLEV_DISABLE_JIT flag, so one process can time them side by side.
Compilation is triggered once before timing.
"""
import argparse
import time

import numpy as np

from wsobolev import kernels
from wsobolev.grid import GridDomain


def _setup(n, m):
    dom = GridDomain(n, (0.0,) * n, 2.0, m)
    idx = np.flatnonzero(dom.interior_mask().ravel()).astype(np.int64)
    strides = kernels.flat_strides(dom.shape)
    rng = np.random.default_rng(0)
    u = rng.standard_normal(dom.size)
    pot = rng.uniform(0, 1, dom.size)
    drift = np.ascontiguousarray(rng.standard_normal((n, dom.size)))
    return dom, idx, strides, u, pot, drift


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(n, m):
    dom, idx, strides, u, pot, drift = _setup(n, m)
    inv_h2, inv_2h = 1 / dom.h**2, 0.5 / dom.h
    # CG right-hand side: obstacle in the middle, as in a capacity solve
    b = np.zeros(dom.size)
    b[idx[: idx.size // 2]] = 1.0
    return {
        "schrodinger_apply": (
            lambda: kernels._schrodinger_apply_nb(u, pot, idx, strides, inv_h2),
            lambda: kernels._schrodinger_apply_np(u, pot, idx, strides, inv_h2)),
        "drift_apply": (
            lambda: kernels._drift_apply_nb(u, drift, pot, idx, strides, inv_h2, inv_2h),
            lambda: kernels._drift_apply_np(u, drift, pot, idx, strides, inv_h2, inv_2h)),
        "cg_graph_laplace(200 it)": (
            lambda: kernels._cg_graph_laplace_nb(b, idx, strides, 1e-30, 200),
            lambda: kernels._cg_graph_laplace_np(b, idx, strides, 1e-30, 200)),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':26s} {'grid':>8s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speedup':>8s}")
    for n, m in [(2, 129), (2, 513), (3, 65)]:
        for name, (nb, np_) in cases(n, m).items():
            nb()  # compile
            t_nb = _best(nb, args.repeat)
            t_np = _best(np_, args.repeat)
            print(f"{name:26s} {f'{m}^{n}':>8s} {1e3 * t_nb:11.3f} {1e3 * t_np:11.3f} "
                  f"{t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
