"""Reproducible experiment bundles behind ``sorites demo``.

Each chapter runs a fixed set of exact experiments and reports one
:class:`Check` per claim.  Parameters are fixed; only randomized sweeps
read the seed.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .calculus import (
    Affine,
    GridFn,
    euler_ode,
    exp_partial,
    exp_product,
    exp_tail_bound,
    gronwall_check,
    inverse_function,
    log_search,
    mean_value_solve,
    root_search,
)
from .continuum import GraphMetric, build_grid
from .measure import (
    MFn,
    ProbSpace,
    ae_eq,
    chebyshev,
    expectation,
    extract_ae_subsequence,
    l1_verdict,
    level_set_sum,
)
from .scale import ScaleContext, decimal_preview, format_rational, sorites_witness
from .topology import compactness_profile, covering_number, packing_number, sorites_path
from .words import TreeWordMetric, gen_associahedron, gen_hypercube_packing, tree_graph, word_continuum

__all__ = ["Check", "CHAPTERS", "run_chapter", "CATALAN"]

CATALAN = {3: 5, 4: 14, 5: 42, 6: 132, 7: 429, 8: 1430, 9: 4862, 10: 16796, 11: 58786, 12: 208012}


@dataclass
class Check:
    chapter: str
    name: str
    passed: bool
    measured: str

    def to_json(self) -> dict:
        return {"chapter": self.chapter, "name": self.name, "passed": self.passed, "measured": self.measured}


def _words(seed: int) -> list[Check]:
    out = []
    counts = {n: gen_associahedron(n, diameter_limit=0).meta["node_count"] for n in CATALAN}
    out.append(Check("words", "catalan node counts N=3..12", counts == CATALAN,
                     " ".join(str(counts[n]) for n in sorted(counts))))
    for kind in ("hyperbolic", "cantor"):
        ok = True
        for omega in range(1, 9):
            t = TreeWordMetric(kind, omega).scaled_table().astype(np.int64)
            # d(x, z) <= max(d(x, y), d(y, z)) for every triple
            worst = np.maximum(t[:, :, None], t[None, :, :])
            ok &= bool(np.all(t[:, None, :] <= worst))
        out.append(Check("words", f"ultrametric law for {kind} leaves, omega<=8", ok, "exhaustive"))
    ok = True
    for omega in range(1, 7):
        closed = TreeWordMetric("path", omega, "all").scaled_table()
        paths = GraphMetric(tree_graph(omega, "path")).scaled_table()
        ok &= bool(np.array_equal(np.asarray(closed, dtype=object), np.asarray(paths, dtype=object)))
    out.append(Check("words", "path metric closed form equals tree shortest paths, omega<=6", ok, "exhaustive"))
    pk = gen_hypercube_packing(1 << 12)
    out.append(Check("words", "hypercube packing pairwise distance >= 1/8",
                     pk.separated, f"{len(pk.masks)} sets, min distance {format_rational(pk.min_distance)}"))
    return out


def _calculus(seed: int) -> list[Check]:
    out = []
    e10 = exp_partial(1, 10)
    out.append(Check("calculus", "exp_partial(1, 10)", e10 == Fraction(9864101, 3628800), format_rational(e10)))
    gap = abs(exp_product(1, 1000) - exp_partial(1, 1000))
    out.append(Check("calculus", "product formula gap < 3/2000", gap < Fraction(3, 2000), decimal_preview(gap, 8)))
    add = abs(exp_partial(1, 50) * exp_partial(-1, 50) - 1)
    bound = exp_tail_bound(2, 50)
    out.append(Check("calculus", "additivity remainder < 1e-30 and within its bound",
                     add < Fraction(1, 10**30) and add <= bound, f"{float(add):.3e}"))
    ok = True
    step = exp_partial(Fraction(1, 100), 100) - 1
    for r in (Fraction(1, 2), Fraction(2), Fraction(3), Fraction(10)):
        y = log_search(r, 100)
        lo, hi = exp_partial(y, 100), exp_partial(y + Fraction(1, 100), 100)
        ok &= lo <= r < hi and abs(lo - r) < r * step
    out.append(Check("calculus", "log round trip for r in {1/2, 2, 3, 10}", ok, "T=100"))
    root = root_search(2, 2, Fraction(1, 100))
    out.append(Check("calculus", "root_search(2, 2, 1/100)", root == Fraction(141, 100), format_rational(root)))
    eps = Fraction(1, 10**4)
    p1 = euler_ode(Affine(1), 1, eps, K=3, L=1)
    p2 = euler_ode(Affine(1), 1 + Fraction(1, 10**6), eps, K=3, L=1)
    err = abs(p1(1) - exp_partial(1, 100))
    out.append(Check("calculus", "Euler y'=y at eps=1e-4 within 6e-4", err < Fraction(6, 10**4), decimal_preview(err, 8)))
    rep = gronwall_check(p1, p2, 1)
    h1 = abs(p2(1) - p1(1))
    bound = Fraction(1, 10**6) * (1 + eps) ** (10**4)
    out.append(Check("calculus", "Gronwall bound certified on gap 1e-6", rep.holds and h1 <= bound,
                     f"max ratio {decimal_preview(rep.max_ratio, 6)}"))
    f = GridFn.from_function(0, 1, Fraction(1, 100), lambda x: x * x)
    x = mean_value_solve(f, Fraction(1, 4))
    out.append(Check("calculus", "mean value point of x^2 at 1/4", x == Fraction(1, 2), format_rational(x)))
    g = GridFn.from_function(-1, 1, Fraction(1, 200), lambda x: x**3 + x)
    inv = inverse_function(g, 2, ScaleContext(100))
    out.append(Check("calculus", "inverse of x^3 + x round trips within eps", inv.round_trip_error <= Fraction(1, 200),
                     format_rational(inv.round_trip_error)))
    return out


def _measure(seed: int) -> list[Check]:
    out = []
    rng = np.random.default_rng(seed)
    ok_c = ok_l = True
    for _ in range(200):
        n = int(rng.integers(1, 12))
        space = ProbSpace.from_weights([int(w) for w in rng.integers(0, 20, n) + 1])
        f = MFn([Fraction(int(a), int(b)) for a, b in zip(rng.integers(0, 30, n), rng.integers(1, 7, n))])
        c = Fraction(int(rng.integers(1, 30)), int(rng.integers(1, 7)))
        ok_c &= chebyshev(space, f, c).holds
        ok_l &= expectation(space, f) == level_set_sum(space, f)
    out.append(Check("measure", "Chebyshev on 200 random instances", ok_c, f"seed {seed}"))
    out.append(Check("measure", "level-set identity on 200 random instances", ok_l, f"seed {seed}"))
    ctx = ScaleContext(100)
    N = 10**4
    space = ProbSpace.uniform(N)
    spike = MFn([N] + [0] * (N - 1))
    zero = MFn([0] * N)
    l1 = l1_verdict(space, spike, ctx)
    ae = ae_eq(space, spike, zero, ctx)
    out.append(Check("measure", "spike rejected as L1", not l1.verdict,
                     "tails " + ", ".join(f"{format_rational(a)}:{format_rational(t)}" for a, t in l1.tails.items())))
    out.append(Check("measure", "spike a.e. equal to zero", ae.verdict, f"exceptional mass {format_rational(ae.mass)}"))
    n = 64
    space = ProbSpace.uniform(n)
    g = MFn([0] * n)
    # uniform shift 4^-i plus a moving spike carrying another 4^-i of mass; d1 = 2 * 4^-i
    fs = [MFn([Fraction(1, 4**i) + (1 if x == i % n else 0) * Fraction(n, 4**i) for x in range(n)]) for i in range(1, 25)]
    rep = extract_ae_subsequence(space, fs, g, ctx, depth=10)
    worst = max(m * 2**k for k, m in enumerate(rep.exceptional_mass, start=1))
    out.append(Check("measure", "subsequence certified to depth 10", rep.certified,
                     f"indices {rep.indices}, max m(A_k) 2^k = {format_rational(worst)}"))
    return out


def _topology(seed: int) -> list[Check]:
    out = []
    ctx = ScaleContext(100)
    cantor = word_continuum("cantor", 16, ctx, carrier="all")
    cov = covering_number(cantor, Fraction(1, 128))
    out.append(Check("topology", "Cantor omega=16 covering at 1/128 <= 255", cov.count <= 255, str(cov.count)))
    hyp = word_continuum("hyperbolic", 16, ctx)
    pk = packing_number(hyp, Fraction(1, 2))
    out.append(Check("topology", "hyperbolic omega=16 packing at 1/2 >= 256", pk.count >= 256, str(pk.count)))
    ctx_b = ScaleContext(100, compact_budget=10**4)
    big = compactness_profile(build_grid(0, 10**6, 1, ctx_b))
    fine = compactness_profile(build_grid(0, 1, Fraction(1, 10**6), ctx_b))
    out.append(Check("topology", "[0, 10^6]_1 not compact", not big.compact_verdict,
                     f"cover {big.covering_at_threshold}, pack {big.packing_at_threshold}"))
    out.append(Check("topology", "[0, 1]_(1e-6) compact", fine.compact_verdict,
                     f"cover {fine.covering_at_threshold}, pack {fine.packing_at_threshold}"))
    w = sorites_witness(ScaleContext(100, mesh=Fraction(1, 10**6)), 1)
    out.append(Check("topology", "sorites witness at 1e-6 over [0, 1]", w.ok, f"{w.steps} steps"))
    leaves = word_continuum("cantor", 10, ctx)
    rng = np.random.default_rng(seed)
    none = 0
    tried = 0
    while tried < 1000:
        x, y = (int(v) for v in rng.integers(0, leaves.n, 2))
        if leaves.indistinguishable(x, y):
            continue
        tried += 1
        none += sorites_path(leaves, x, y) is None
    out.append(Check("topology", "no sorites path between distinguishable Cantor leaves", none == tried,
                     f"{none}/{tried} pairs, seed {seed}"))
    return out


CHAPTERS: dict[str, Callable[[int], list[Check]]] = {
    "words": _words,
    "calculus": _calculus,
    "measure": _measure,
    "topology": _topology,
}


def run_chapter(chapter: str, seed: int = 0) -> list[Check]:
    if chapter not in CHAPTERS:
        raise ValueError(f"unknown chapter {chapter!r}; choose from {', '.join(CHAPTERS)}")
    return CHAPTERS[chapter](seed)
