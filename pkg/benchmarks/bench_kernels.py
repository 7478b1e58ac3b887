"""Compiled vs pure-Python recursion kernels.

Usage: python benchmarks/bench_kernels.py [--n 200000] [--repeat 5]

Each kernel is timed on identical inputs through both back ends, and the
outputs are compared bit for bit.
"""
import argparse
import time

import numpy as np

from wdwhittle import _kernels_py

try:
    from wdwhittle import _kernels
except ImportError:  # extension not built
    _kernels = None


def cases(n: int, rng: np.random.Generator):
    xi = rng.standard_normal(n)
    b = 0.3 * np.arange(1, 51, dtype=np.float64) ** -3.0
    return {
        "garch_filter(1,1)": lambda k: k.garch_filter(xi, 1.0, np.array([0.1]), np.array([0.2])),
        "garch_filter(2,2)": lambda k: k.garch_filter(xi, 1.0, np.array([0.1, 0.05]), np.array([0.2, 0.1])),
        "arch_filter(L=50)": lambda k: k.arch_filter(xi, 1.0, b),
        "bilinear_filter(1,1)": lambda k: k.bilinear_filter(xi, 1.0, np.array([0.2]), np.array([0.3])),
    }


def best_of(fn, repeat: int) -> float:
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    if _kernels is None:
        print("compiled extension not available; build with `pip install -e .`")
        return 1
    rng = np.random.default_rng(0)
    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'kernel':<22s} {'python [s]':>11s} {'compiled [s]':>13s} {'speedup':>9s}  identical")
    for name, call in cases(args.n, rng).items():
        t_py = best_of(lambda: call(_kernels_py), max(1, args.repeat // 2))
        t_c = best_of(lambda: call(_kernels), args.repeat)
        same = np.array_equal(call(_kernels_py), call(_kernels))
        print(f"{name:<22s} {t_py:11.4f} {t_c:13.5f} {t_py / t_c:8.1f}x  {same}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
