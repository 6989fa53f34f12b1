"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--quick]

Both backends get identical inputs; outputs are compared before timing.
"""
from __future__ import annotations

import argparse
import sys
import timeit
from fractions import Fraction

import numpy as np

from sorites import _kernels_py
from sorites.continuum import build_grid
from sorites.scale import ScaleContext
from sorites.words import word_continuum

try:
    from sorites import _kernels as _compiled
except ImportError:
    _compiled = None


def _weighted_graph(n: int, degree: int, seed: int):
    rng = np.random.default_rng(seed)
    nbrs = [dict() for _ in range(n)]
    for u in range(n):
        for v in rng.integers(0, n, degree):
            v = int(v)
            if v != u:
                w = int(rng.integers(1, 10))
                nbrs[u][v] = nbrs[v][u] = w
    aptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum([len(d) for d in nbrs], out=aptr[1:])
    adj = np.array([v for d in nbrs for v in sorted(d)], dtype=np.int64)
    wts = np.array([d[v] for d in nbrs for v in sorted(d)], dtype=np.int64)
    return aptr, adj, wts


def workloads(quick: bool):
    ctx = ScaleContext(100)
    n_grid = 20_000 if quick else 200_000
    grid = build_grid(0, 1, Fraction(1, n_grid), ctx)
    gb = grid.balls(Fraction(1, 1000))
    cantor = word_continuum("cantor", 12 if quick else 16, ctx, carrier="all")
    cb = cantor.balls(Fraction(1, 128))
    # a graph-like ball index: each point sees its immediate neighbours
    nb = grid.balls(grid.source.eps, closed=True)
    g = _weighted_graph(5_000 if quick else 50_000, 4, 1)
    return [
        (f"greedy_cover grid n={grid.n}", "greedy_cover", (gb.rptr, gb.rlo, gb.rhi, grid.n)),
        (f"greedy_cover cantor n={cantor.n}", "greedy_cover", (cb.rptr, cb.rlo, cb.rhi, cantor.n)),
        (f"greedy_pack grid n={grid.n}", "greedy_pack", (gb.rptr, gb.rlo, gb.rhi, grid.n)),
        (f"components grid n={grid.n}", "components", (nb.rptr, nb.rlo, nb.rhi, grid.n)),
        (f"bfs grid n={grid.n}", "bfs", (nb.rptr, nb.rlo, nb.rhi, grid.n, 0)),
        (f"bounded_dijkstra n={len(g[0]) - 1}", "bounded_dijkstra", (*g, len(g[0]) - 1, 0, 40)),
    ]


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    args = ap.parse_args(argv)
    if _compiled is None:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation` first", file=sys.stderr)
        return 1
    print(f"{'workload':40s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for label, name, call_args in workloads(args.quick):
        py, cy = getattr(_kernels_py, name), getattr(_compiled, name)
        if not _same(py(*call_args), cy(*call_args)):
            print(f"{label}: backends disagree", file=sys.stderr)
            return 2
        t_py = min(timeit.repeat(lambda: py(*call_args), number=1, repeat=args.repeat))
        t_cy = min(timeit.repeat(lambda: cy(*call_args), number=1, repeat=args.repeat))
        print(f"{label:40s} {t_py:10.4f} {t_cy:10.4f} {t_py / max(t_cy, 1e-9):7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
