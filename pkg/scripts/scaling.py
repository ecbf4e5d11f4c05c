"""Solve time against n for the density-0.01 random sparse family (m = n + 10)."""

import argparse
import time

import numpy as np

from bppnnls.gen import GeneratorSpec, gen_random_sparse
from bppnnls.nnls import bpp_solve


def best_time(problem, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        res = bpp_solve(problem)
        best = min(best, time.perf_counter() - t0)
    return best, res


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[200, 400, 800, 1600, 3200])
    ap.add_argument("--density", type=float, default=0.01)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    bpp_solve(gen_random_sparse(GeneratorSpec(60, 50, density=0.1)).problem)  # compile kernels
    times = []
    print(f"{'n':>6} {'nnz':>8} {'support':>8} {'pivots':>7} {'seconds':>9}")
    for n in args.sizes:
        P = gen_random_sparse(GeneratorSpec(n + 10, n, density=args.density, seed=n)).problem
        t, res = best_time(P, args.repeats)
        times.append(t)
        print(f"{n:6d} {P.A.nnz:8d} {len(res.F):8d} {res.pivot_iterations:7d} {t:9.4f}")
    if len(times) > 1:
        slope = np.polyfit(np.log(args.sizes), np.log(times), 1)[0]
        print(f"log-log slope {slope:.2f}")


if __name__ == "__main__":
    main()
