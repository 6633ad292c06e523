"""Time the explicit right-hand side on both backends.

    python benchmarks/bench_kernels.py [--sizes 32 64 128 256] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from foragesim import kernels
from foragesim.config import random_smooth
from foragesim.grid import Grid


def fields(n, seed=0):
    grid = Grid.unit(n, n)
    rng = np.random.default_rng(seed)
    return grid, [np.ascontiguousarray(1.5 + random_smooth(grid, rng)) for _ in range(4)]


def time_backend(rhs, grid, data, repeat):
    out = [np.empty_like(data[0]) for _ in range(3)]
    hx, hy = grid.h

    def call():
        rhs(*data, hx, hy, 1.0, 0.5, 1.0, 1.0, 1.0, 1.0, 2.0, 2.0, True, *out)

    number = max(1, int(2e6 // grid.size))
    best = min(timeit.repeat(call, number=number, repeat=repeat))
    return best / number


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[32, 64, 128, 256])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    backends = {"python": kernels.python_rhs}
    if kernels.compiled_rhs is not None:
        backends["compiled"] = kernels.compiled_rhs
    print(f"{'cells':>8} " + " ".join(f"{b + ' [us]':>15}" for b in backends) + f" {'speedup':>8}")
    for n in args.sizes:
        grid, data = fields(n)
        times = {b: time_backend(rhs, grid, data, args.repeat) for b, rhs in backends.items()}
        row = f"{n:>5}^2 " + " ".join(f"{1e6 * t:>15.1f}" for t in times.values())
        if len(times) == 2:
            row += f" {times['python'] / times['compiled']:>8.1f}"
        print(row)


if __name__ == "__main__":
    main()
