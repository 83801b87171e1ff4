"""Time the numba kernels against their numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--repeat 5] [--n 200000]

Both variants are imported directly, so the SLICEREG_NUMBA flag does not
matter here. The first numba call (compilation) is excluded from timing.
"""
import argparse
import timeit

import numpy as np

from slicereg import _kernels as K


def cases(n: int, rng):
    q = rng.normal(size=(n, 4))
    r = rng.normal(size=(n, 4))
    unit = rng.normal(size=(n, 4))
    unit[:, 0] = 0
    unit /= np.linalg.norm(unit, axis=1, keepdims=True)
    coeffs = rng.normal(size=(8, 4))
    a, b = rng.uniform(-2, 2, n), rng.uniform(0, 2, n)
    side = int(np.sqrt(n))
    grid = rng.normal(size=(side, side))
    u, v = rng.normal(size=(side, side)), rng.normal(size=(side, side))
    m = min(n, 3000)
    x, fx = rng.normal(size=(m, 4)), rng.normal(size=(m, 4))
    return {
        "qmul": (K._qmul_nb, K._qmul_np, (q, r)),
        "poly_horner": (K._poly_horner_nb, K._poly_horner_np, (coeffs, a, b)),
        "det_formula": (K._det_formula_nb, K._det_formula_np, (q, r, unit)),
        "local_minima": (K._local_minima_nb, K._local_minima_np, (grid,)),
        "sign_cells": (K._sign_cells_nb, K._sign_cells_np, (u, v)),
        "min_separation": (K._min_separation_nb, K._min_separation_np, (x, fx)),
    }


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=200_000)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<16}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, (nb, npf, inp) in cases(args.n, rng).items():
        nb(*inp)  # compile
        t_nb = min(timeit.repeat(lambda: nb(*inp), number=1, repeat=args.repeat)) * 1e3
        t_np = min(timeit.repeat(lambda: npf(*inp), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<16}{t_nb:>12.3f}{t_np:>12.3f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
