"""numba vs numpy cost per BRDF evaluation and per sample.

    python3 benchmarks/backends.py [n] [reps]
"""

import sys

from eon import _accel, bench


def main(n=1_000_000, reps=7):
    if not _accel.USE_NUMBA:
        sys.exit("numba is disabled (EON_DISABLE_NUMBA); nothing to compare")
    rows = bench.run(n=n, reps=reps, backends=("numba", "numpy"))
    print(f"{'model':<12} {'op':<16} {'numba':>9} {'numpy':>9} {'speedup':>8}   (ns/op, n={n}, median of {reps})")
    for row in rows:
        if row.backend != "numba":
            continue
        slow = bench.lookup(rows, row.model, row.op, "numpy")
        print(f"{row.model:<12} {row.op:<16} {row.ns_per_op:9.2f} {slow:9.2f} {slow / row.ns_per_op:7.1f}x")


if __name__ == "__main__":
    args = [int(a) for a in sys.argv[1:3]]
    main(*args)
