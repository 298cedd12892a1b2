"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is run on identical inputs through both backends; outputs are
compared before timing, so a speedup is only reported for agreeing results.
"""

import argparse
import timeit

import numpy as np

from rsrepair import _kernels_py
from rsrepair.fields import get_tower

try:
    from rsrepair import _kernels
except ImportError:  # extension not built
    _kernels = None


def cases(rng):
    f2 = get_tower(2, 1)
    f4 = get_tower(4, 1)
    big = get_tower(2, 16)
    g8 = get_tower(2, 8)
    for size in (64, 256):
        a = rng.integers(0, 2, (size, size + 1))
        yield f"rref GF(2) {size}x{size + 1}", "rref", (a, f2.base.mul_table, f2.base.inv_table, size), True
    a4 = rng.integers(0, 4, (128, 129))
    yield "rref GF(4) 128x129", "rref", (a4, f4.base.mul_table, f4.base.inv_table, 128), True
    stack = rng.integers(0, 2, (255, 8, 24))
    yield "rref_many GF(2) 255 x 8x24", "rref_many", (stack, f2.base.mul_table, f2.base.inv_table), True
    codes = rng.integers(0, 2**16, 4096)
    yield "xor_rank 4096 x 16 bits", "xor_rank", (codes,), False
    coeffs = rng.integers(0, big.size, 128)
    xs = np.arange(big.size, dtype=np.int64)
    yield "horner deg 127 on GF(2^16)", "horner", (coeffs, xs, big.log, big.exp, big.order), False
    v = rng.integers(0, g8.size, g8.size)
    xs8 = np.arange(g8.size, dtype=np.int64)
    yield "power_sums n=256 k=128", "power_sums", (v, xs8, 128, g8.log, g8.exp, g8.order), False


def run(fn, args, inplace):
    if inplace:
        a = np.array(args[0], dtype=np.int64)
        return fn(a, *args[1:]), a
    return fn(*args), None


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not available; only the fallback can run")
        return
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':32s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for label, name, kargs, inplace in cases(rng):
        slow, fast = getattr(_kernels_py, name), getattr(_kernels, name)
        r1, a1 = run(slow, kargs, inplace)
        r2, a2 = run(fast, kargs, inplace)
        same = np.array_equal(np.asarray(r1), np.asarray(r2)) and (a1 is None or np.array_equal(a1, a2))
        if not same:
            print(f"{label:32s} backends disagree")
            continue
        t_slow = min(timeit.repeat(lambda: run(slow, kargs, inplace), number=1, repeat=args.repeat))
        t_fast = min(timeit.repeat(lambda: run(fast, kargs, inplace), number=1, repeat=args.repeat))
        print(f"{label:32s} {1e3 * t_slow:12.3f} {1e3 * t_fast:12.3f} {t_slow / t_fast:7.1f}x")


if __name__ == "__main__":
    main()
