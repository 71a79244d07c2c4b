"""Benchmark the compiled reaction kernels against the numpy fallback.

Run with the package installed:

    python3 benchmarks/bench_kernels.py [--n 512] [--repeats 20]

Times the two hot per-cell updates (exact cubic flow, odd-polynomial RK4,
each with and without the tangent) and one full trajectory through the
solver under each backend.  ``CRITFIELD_PURE=1`` in the environment would
force the fallback for everything; here both implementations are called
directly so a single run produces the comparison.
"""

import argparse
import time
import warnings

import numpy as np

import critfield as cf
from critfield import kernels
from critfield.kernels import _np_cubic_exact, _np_rk4_odd_poly


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(n, repeats):
    rng = np.random.default_rng(0)
    base = rng.standard_normal((n, n))
    jac = np.empty_like(base)
    b = np.array([0.0, 1.0])
    rows = []

    compiled = kernels._IMPL
    variants = [("numpy", _np_cubic_exact, _np_rk4_odd_poly)]
    if compiled is not None:
        variants.append(("compiled", compiled.cubic_exact, compiled.rk4_odd_poly))

    for label, cubic, rk4 in variants:
        u = base.copy()
        rows.append((f"cubic_exact        [{label}]",
                     _time(lambda: cubic(u, 0.05, None), repeats)))
        u = base.copy()
        rows.append((f"cubic_exact+tan    [{label}]",
                     _time(lambda: cubic(u, 0.05, jac), repeats)))
        u = base.copy()
        rows.append((f"rk4_odd_poly       [{label}]",
                     _time(lambda: rk4(u, b, 0.05, None), repeats)))
        u = base.copy()
        rows.append((f"rk4_odd_poly+tan   [{label}]",
                     _time(lambda: rk4(u, b, 0.05, jac), repeats)))
    return rows


def bench_evolve(n, repeats):
    warnings.filterwarnings("ignore")
    grid = cf.TorusGrid(4.0, n)
    eta = cf.mollify(cf.sample_white_noise(grid, 0, 0), 0.1)
    cfg = cf.SolverConfig(cf.allen_cahn(1.0), 0.1, 0.0, 0.25, grid)
    rows = []
    import critfield.kernels as K

    impl = K._IMPL
    for label, active in [("numpy", None), ("compiled", impl)]:
        if active is None and impl is None and label == "compiled":
            continue
        K._IMPL = active if label == "compiled" else None
        if label == "compiled" and impl is None:
            continue
        rows.append((f"evolve n={n} T=0.25 [{label}]",
                     _time(lambda: cf.evolve(eta, cfg), max(3, repeats // 5))))
    K._IMPL = impl
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=512)
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()

    print(f"active backend: {kernels.backend()}")
    rows = bench_kernels(args.n, args.repeats) + bench_evolve(args.n, args.repeats)
    width = max(len(name) for name, _ in rows)
    print(f"{'benchmark':<{width}}  best (ms)")
    for name, t in rows:
        print(f"{name:<{width}}  {1e3 * t:9.3f}")


if __name__ == "__main__":
    main()
