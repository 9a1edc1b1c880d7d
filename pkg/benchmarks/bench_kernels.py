"""Time the compiled and numpy kernel backends on identical inputs.

Usage: python3 benchmarks/bench_kernels.py [--paths N] [--steps M] [--repeat R]
"""

import argparse
import timeit

import numpy as np

from smalltime.kernels import backends


def cases(paths, steps):
    g = np.random.default_rng(0)
    zv = g.standard_normal((paths, steps))
    zp = g.standard_normal((paths, steps))
    dl = 0.01 * g.standard_normal((paths, steps))
    v = g.uniform(-np.pi / 2, np.pi / 2, paths * steps)
    w = g.standard_exponential(paths * steps)
    return {
        "heston_terminal": lambda k: k.heston_terminal(100.0, 0.04, 1.0, 0.04, 0.5, -0.7,
                                                       1e-4, zv, zp),
        "sde_euler": lambda k: k.sde_euler(1.0, 1.0, 0.1, dl),
        "stable_cms": lambda k: k.stable_cms(1.5, 0.3, v, w),
    }


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--paths", type=int, default=20_000)
    p.add_argument("--steps", type=int, default=64)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    impls = backends()
    print(f"paths={args.paths} steps={args.steps} best of {args.repeat}")
    print(f"{'kernel':<16}" + "".join(f"{name:>12}" for name in impls) + f"{'speedup':>10}")
    for name, fn in cases(args.paths, args.steps).items():
        times = {b: min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
                 for b, mod in impls.items()}
        row = f"{name:<16}" + "".join(f"{times[b] * 1e3:>10.1f}ms" for b in impls)
        if "cython" in times:
            row += f"{times['python'] / times['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
