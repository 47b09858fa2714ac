"""Compare the compiled and pure-numpy recurrence kernels.

Run with ``python benchmarks/bench_kernels.py``; prints one line per case
with both timings and the largest relative difference between backends.
"""

import argparse
import timeit

import numpy as np

from fracspec import _kernels_py

try:
    from fracspec import _jacobi
except ImportError:
    _jacobi = None

CASES = [
    # (label, nmax, points)
    ("assembly N=64", 64, 98),
    ("error norm N=64", 64, 320),
    ("collocation N=128", 128, 128),
    ("expansion N=512", 512, 1024),
]


def _best(fn, repeat):
    t = timeit.Timer(fn)
    number, _ = t.autorange()
    return min(t.repeat(repeat=repeat, number=number)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _jacobi is None:
        print("compiled extension not built; only the numpy kernels are available")
    rng = np.random.default_rng(7)
    print(f"{'case':<20}{'kernel':<10}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>9}{'max rel diff':>14}")
    for label, nmax, m in CASES:
        x = np.sort(rng.uniform(-1.0, 1.0, m))
        for kernel, args_ in (("jacobi", (-0.35, 0.35, nmax, x)), ("legendre", (nmax, x))):
            py = getattr(_kernels_py, kernel + "_table")
            t_py = _best(lambda: py(*args_), args.repeat)
            if _jacobi is None:
                print(f"{label:<20}{kernel:<10}{1e3 * t_py:>12.3f}{'-':>13}{'-':>9}{'-':>14}")
                continue
            cy = getattr(_jacobi, kernel + "_table")
            t_cy = _best(lambda: cy(*args_), args.repeat)
            a, b = py(*args_), cy(*args_)
            diff = np.max(np.abs(a - b) / np.maximum(np.abs(a), 1.0))
            print(f"{label:<20}{kernel:<10}{1e3 * t_py:>12.3f}{1e3 * t_cy:>13.3f}"
                  f"{t_py / t_cy:>9.1f}{diff:>14.1e}")


if __name__ == "__main__":
    main()
