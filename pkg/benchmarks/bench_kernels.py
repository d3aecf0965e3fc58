"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat N]

Prints median wall time per call for the two raw kernels over a range of
table shapes, then end-to-end ``solve`` time on a fixed batch of random
queries. Backends that are not built are skipped.
"""
import argparse
import statistics
import time

import numpy as np

from idq import kernels, solve
from idq.generate import random_diagram, random_query


def _median(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def _tables(rng, nu, ni, nj):
    pi_i = rng.dirichlet(np.ones(ni), size=nu)
    pi_j = rng.dirichlet(np.ones(nj), size=(nu, ni))
    return pi_i, pi_j


def bench_kernels(repeat):
    rng = np.random.default_rng(0)
    shapes = [(1, 2, 2), (16, 3, 3), (256, 3, 3), (4096, 3, 3), (4096, 8, 8)]
    print(f"{'shape (nu,ni,nj)':>18} {'kernel':>12}" + "".join(f"{b:>12}" for b in kernels.available()))
    for shape in shapes:
        pi_i, pi_j = _tables(rng, *shape)
        for name in ("marginalize", "reverse"):
            row = []
            for b in kernels.available():
                kernels.use_backend(b)
                fn = getattr(kernels, name)
                row.append(_median(lambda: fn(pi_i, pi_j), repeat))
            print(f"{str(shape):>18} {name:>12}" + "".join(f"{t * 1e6:>10.1f}us" for t in row))


def bench_solve(repeat):
    rng = np.random.default_rng(1)
    cases = []
    for _ in range(40):
        d = random_diagram(rng, 8, states=(2, 3), density=0.5)
        cases.append((d, random_query(rng, d)))

    def run():
        for d, q in cases:
            solve(d, q)

    print(f"\nsolve on 40 random 8-node queries (median of {repeat}):")
    for b in kernels.available():
        kernels.use_backend(b)
        print(f"  {b:>8}: {_median(run, repeat) * 1e3:8.2f} ms")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=50)
    args = ap.parse_args()
    prev = kernels.backend
    try:
        bench_kernels(args.repeat)
        bench_solve(max(3, args.repeat // 10))
    finally:
        kernels.use_backend(prev)


if __name__ == "__main__":
    main()
