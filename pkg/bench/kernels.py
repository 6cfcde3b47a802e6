"""Time the two integer-point enumeration kernels on the seeded corpus.

    python3 bench/kernels.py --count 200

Prints per-kernel totals and checks that both return identical point lists.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from gctuf import _kernels
from gctuf.generators import decomposable_instance
from gctuf.oracle import lp_box


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--max-n", type=int, default=12)
    args = ap.parse_args()
    jobs = []
    for seed in range(args.count):
        inst = decomposable_instance(seed, max_n=args.max_n).instance
        bx = lp_box(inst.T, inst.b, inst.n)
        if bx is not None:
            jobs.append((np.array(inst.T), np.array(inst.b), np.array(bx.lower), np.array(bx.upper), 10**7))
    kernels = [("numpy", False)] + ([("numba", True)] if _kernels.HAVE_NUMBA else [])
    results = {}
    for name, flag in kernels:
        if flag:
            _kernels.enumerate_box(*jobs[0], use_numba=True)  # compile outside the timing
        t0 = time.perf_counter()
        results[name] = [_kernels.enumerate_box(*j, use_numba=flag) for j in jobs]
        total = time.perf_counter() - t0
        points = sum(len(r) for r in results[name])
        print(f"{name:>6}: {len(jobs)} systems, {points} points, {total:.3f} s")
    if len(results) == 2:
        same = all(np.array_equal(a, b) for a, b in zip(results["numpy"], results["numba"]))
        print(f"identical: {str(same).lower()}")
    else:
        print("numba unavailable; only the numpy kernel ran")


if __name__ == "__main__":
    main()
