"""Timing comparison of the compiled and pure-numpy Hill kernels.

Both backends are imported directly so one process can time them side by
side; the package-level selection (TRAPCALC_FORCE_PYTHON_KERNELS) is not
involved. Results double as an agreement check: the two implementations
run the same fixed-step RK4 and must match to near machine precision.
"""

import argparse
import time

import numpy as np

from trapcalc._kernels import _hill_py

try:
    from trapcalc._kernels import _hill_cy
except ImportError:
    _hill_cy = None


def best_of(fn, repeats):
    best = np.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def scan_workload(backend, na, nq, steps):
    a = np.linspace(0.0, 5.0, na)
    q = np.linspace(0.0, 2.0, nq)
    aa, qq = np.meshgrid(a, q, indexing="ij")
    return lambda: backend.mathieu_scan_traces(aa.ravel(), qq.ravel(), steps)


def single_workload(backend, fine_steps):
    # one deep Mathieu cell; w sampled at endpoints and midpoints
    a, q = 3.7, 1.9
    h = np.pi / fine_steps
    ts = np.arange(2 * fine_steps + 1) * (0.5 * h)
    w = a - 2.0 * q * np.cos(2.0 * ts)
    return lambda: backend.hill_monodromy_samples(w, h)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--na", type=int, default=101)
    ap.add_argument("--nq", type=int, default=101)
    ap.add_argument("--steps", type=int, default=4096, help="RK4 steps per scan cell")
    ap.add_argument("--fine-steps", type=int, default=200000,
                    help="RK4 steps for the single-trajectory workload")
    ap.add_argument("--repeats", type=int, default=3, help="take the best of N runs")
    args = ap.parse_args(argv)

    print(f"python backend:   {_hill_py.BACKEND}")
    if _hill_cy is None:
        print("compiled backend: not built (pip install -e . rebuilds it)")
    else:
        print(f"compiled backend: {_hill_cy.BACKEND}")
    print()

    workloads = [
        (f"scan {args.na}x{args.nq}, {args.steps} steps", scan_workload,
         (args.na, args.nq, args.steps)),
        (f"single cell, {args.fine_steps} steps", single_workload,
         (args.fine_steps,)),
    ]
    header = f"{'workload':<32} {'python':>10} {'compiled':>10} {'speedup':>8} {'max diff':>10}"
    print(header)
    print("-" * len(header))
    for name, factory, extra in workloads:
        t_py, out_py = best_of(factory(_hill_py, *extra), args.repeats)
        if _hill_cy is None:
            print(f"{name:<32} {t_py:>9.3f}s {'-':>10} {'-':>8} {'-':>10}")
            continue
        t_cy, out_cy = best_of(factory(_hill_cy, *extra), args.repeats)
        ref = np.asarray(out_py[0] if isinstance(out_py, tuple) else out_py)
        got = np.asarray(out_cy[0] if isinstance(out_cy, tuple) else out_cy)
        diff = float(np.max(np.abs(ref - got)))
        print(f"{name:<32} {t_py:>9.3f}s {t_cy:>9.3f}s {t_py / t_cy:>7.1f}x {diff:>10.2e}")


if __name__ == "__main__":
    main()
