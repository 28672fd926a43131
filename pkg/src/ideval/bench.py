"""Benchmark the pure-Python kernel against the compiled one.

Generates a synthetic coded universe (three clusterings over n elements)
and times both backends on the same arrays. Run with:

    python -m ideval.bench --elements 1000000
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from . import _kernels_py


def _synthetic(n: int, clusters: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    b = rng.integers(0, clusters, size=n, dtype=np.int64)
    # exp mostly follows base (realistic diffs are sparse), ideal is noisier
    e = b.copy()
    moved = rng.random(n) < 0.05
    e[moved] = rng.integers(0, clusters, size=int(moved.sum()), dtype=np.int64)
    i = b.copy()
    moved = rng.random(n) < 0.2
    i[moved] = rng.integers(0, clusters, size=int(moved.sum()), dtype=np.int64)
    w = rng.uniform(0.5, 2.0, size=n)
    return b, e, i, w, clusters


def _time(fn, *args, repeat: int) -> tuple[float, tuple]:
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--elements", type=int, default=1_000_000)
    parser.add_argument("--clusters", type=int, default=100_000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    b, e, i, w, nc = _synthetic(args.elements, args.clusters, args.seed)
    try:
        from . import _kernels as compiled
    except ImportError:
        compiled = None
        print("compiled kernel not built; timing pure kernel only")

    blist, elist, ilist = b.tolist(), e.tolist(), i.tolist()
    wlist = w.tolist()

    print(f"{args.elements} elements, {nc} clusters, best of {args.repeat}")
    rows = []
    t_pure, r_pure = _time(
        _kernels_py.full_sums, blist, elist, ilist, wlist, nc, nc, nc,
        repeat=args.repeat,
    )
    rows.append(("full_sums", "pure", t_pure))
    if compiled is not None:
        t_comp, r_comp = _time(
            compiled.full_sums, b, e, i, w, nc, nc, nc, repeat=args.repeat
        )
        rows.append(("full_sums", "compiled", t_comp))
        drift = max(abs(x - y) for x, y in zip(r_pure, r_comp))
        print(f"full_sums: max |pure - compiled| = {drift:.3e}, "
              f"speedup x{t_pure / t_comp:.1f}")

    t_pure, r_pure = _time(
        _kernels_py.impact_sums, blist, elist, wlist, nc, nc,
        repeat=args.repeat,
    )
    rows.append(("impact_sums", "pure", t_pure))
    if compiled is not None:
        t_comp, r_comp = _time(
            compiled.impact_sums, b, e, w, nc, nc, repeat=args.repeat
        )
        rows.append(("impact_sums", "compiled", t_comp))
        drift = max(abs(x - y) for x, y in zip(r_pure, r_comp))
        print(f"impact_sums: max |pure - compiled| = {drift:.3e}, "
              f"speedup x{t_pure / t_comp:.1f}")

    print()
    for name, backend, seconds in rows:
        print(f"  {name:<12} {backend:<9} {seconds * 1000:10.1f} ms")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
