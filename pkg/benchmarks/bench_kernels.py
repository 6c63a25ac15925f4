"""Time the numba and numpy kernel backends on representative inputs.

    python benchmarks/bench_kernels.py [--repeat 5] [--scale 1.0]

The numba column excludes compilation: each kernel runs once before timing.
"""

from __future__ import annotations

import argparse
import timeit
from typing import Callable, Dict, List, Tuple

import numpy as np

from assetgraph._kernels import BACKENDS


def cases(scale: float) -> Dict[str, Tuple[str, Callable[[object], Callable[[], object]]]]:
    rng = np.random.default_rng(0)
    n_vec, dim = int(5000 * scale), 384
    matrix = rng.normal(size=(n_vec, dim))
    matrix /= np.linalg.norm(matrix, axis=1, keepdims=True)
    rows = rng.integers(0, n_vec, 64).astype(np.int64)
    query = matrix[0].copy()

    n_nodes = int(2000 * scale)
    m = 4 * n_nodes
    src = rng.integers(0, n_nodes, m).astype(np.int64)
    dst = rng.integers(0, n_nodes, m).astype(np.int64)

    pop = int(128 * scale)
    objs = rng.random((pop, 2))
    viol = np.where(rng.random(pop) < 0.1, rng.random(pop), 0.0)
    ranks = np.zeros(pop, dtype=np.int64)

    return {
        "half_sq_distances": (f"64 rows of {n_vec}x{dim}", lambda k: lambda: k.half_sq_distances(matrix, rows, query)),
        "pagerank_power": (f"{n_nodes} nodes, {m} edges", lambda k: lambda: k.pagerank_power(n_nodes, src, dst, 0.85, 1000, 1e-10)),
        "nondominated_ranks": (f"population {pop}", lambda k: lambda: k.nondominated_ranks(objs, viol)),
        "crowding_distance": (f"population {pop}", lambda k: lambda: k.crowding_distance(objs, ranks)),
    }


def main(argv: List[str] = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=20, help="calls per timing sample")
    ap.add_argument("--scale", type=float, default=1.0, help="multiplies input sizes")
    args = ap.parse_args(argv)

    backends = [b for b in ("numpy", "numba") if b in BACKENDS]
    print(f"{'kernel':<20} {'input':<26} " + " ".join(f"{b + ' (ms)':>12}" for b in backends) + "   speedup")
    for name, (desc, make) in cases(args.scale).items():
        best = {}
        for b in backends:
            fn = make(BACKENDS[b])
            fn()  # warm-up, triggers numba compilation
            best[b] = min(timeit.repeat(fn, repeat=args.repeat, number=args.number)) / args.number * 1000.0
        speed = f"{best['numpy'] / best['numba']:8.1f}x" if "numba" in best else "     n/a"
        print(f"{name:<20} {desc:<26} " + " ".join(f"{best[b]:12.3f}" for b in backends) + f"  {speed}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
