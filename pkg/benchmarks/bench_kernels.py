"""Compare the compiled and numpy moment kernels on a batch of random states.

    python3 benchmarks/bench_kernels.py [--m 200000] [--d 10] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from directwf._kernels import compiled_state_moments, fallback_state_moments
from directwf.states import haar_batch, rng_from_seed


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=200_000)
    ap.add_argument("--d", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    z = haar_batch(rng_from_seed(1), args.m, args.d)
    impls = {"numpy": fallback_state_moments}
    if compiled_state_moments is None:
        print("compiled kernel not built; timing the numpy path only")
    else:
        impls["cython"] = compiled_state_moments
        diff = np.max(np.abs(compiled_state_moments(z) - fallback_state_moments(z)))
        print(f"max |cython - numpy| = {diff:.3e}")

    best = {}
    for name, fn in impls.items():
        best[name] = min(timeit.repeat(lambda: fn(z), number=1, repeat=args.repeat))
        rate = args.m / best[name] / 1e6
        print(f"{name:>7}: {best[name] * 1e3:8.2f} ms  ({rate:.2f} M states/s, m={args.m}, d={args.d})")
    if len(best) == 2:
        print(f"speed-up: {best['numpy'] / best['cython']:.2f}x")


if __name__ == "__main__":
    main()
