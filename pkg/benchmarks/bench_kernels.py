"""Compare the compiled kernels with the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py [--points N] [--repeat R]``.
Prints the best-of-R wall time per kernel and backend, the speedup, and
the maximum discrepancy between the two backends.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from freeclt import _kernels_py
from freeclt.measure import semicircle, tilted_bernoulli
from freeclt.subordination import _kernel_args

try:
    from freeclt import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None


def _cases(points: int):
    rng = np.random.default_rng(20240611)
    z = rng.uniform(-4, 4, points) + 1j * rng.uniform(1e-3, 2.0, points)
    out = []
    for name, mu, n in (("semicircle", semicircle(), 16), ("tilted_bernoulli(0.9)", tilted_bernoulli(0.9), 64)):
        ax, aw, lo, hi, coef = _kernel_args(mu)
        out.append((name, z, ax, aw, lo, hi, coef, n))
    return out


def _best(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=4000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = {"python": _kernels_py}
    if _kernels_c is not None:
        backends["cython"] = _kernels_c
    else:
        print("compiled extension not available; timing the numpy fallback only")
    print(f"{'case':28s} {'kernel':12s} {'backend':8s} {'seconds':>10s}")
    for name, z, ax, aw, lo, hi, coef, n in _cases(args.points):
        w0 = z / n + 1j
        times, results = {}, {}
        for bname, k in backends.items():
            t1 = _best(lambda: k.cauchy_eval(z, ax, aw, lo, hi, coef), args.repeat)
            t2 = _best(lambda: k.solve_z(z, w0, ax, aw, lo, hi, coef, n, 1e-12), args.repeat)
            times[bname] = (t1, t2)
            results[bname] = (k.cauchy_eval(z, ax, aw, lo, hi, coef)[0],
                              k.solve_z(z, w0, ax, aw, lo, hi, coef, n, 1e-12)[0])
            print(f"{name:28s} {'cauchy_eval':12s} {bname:8s} {t1:10.5f}")
            print(f"{name:28s} {'solve_z':12s} {bname:8s} {t2:10.5f}")
        if "cython" in times:
            sp = [times["python"][i] / times["cython"][i] for i in (0, 1)]
            dg = np.abs(results["python"][0] - results["cython"][0]).max()
            dz = np.abs(results["python"][1] - results["cython"][1]).max()
            print(f"{name:28s} speedup cauchy_eval x{sp[0]:.1f}, solve_z x{sp[1]:.1f}; "
                  f"max |dG| {dg:.2e}, max |dZ| {dz:.2e}")


if __name__ == "__main__":
    main()
