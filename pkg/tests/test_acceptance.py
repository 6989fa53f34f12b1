"""The eleven acceptance criteria, one test each.

Each criterion is a plain function returning ``(passed, measured)``; the
tests record one line per criterion and ``conftest.py`` prints them in the
terminal summary.  Running this file directly prints the same lines.
"""
from __future__ import annotations

import itertools
import time
from fractions import Fraction

import numpy as np
import pytest

from sorites.calculus import (
    Affine,
    GridFn,
    MultiGridFn,
    diff_quotient,
    euler_ode,
    exp_partial,
    exp_product,
    grid_sum,
    gronwall_check,
    inverse_function,
    log_search,
    mean_value_solve,
    mixed_partial_check,
    root_search,
)
from sorites.continuum import GraphMetric, GridInterval, WeightedGraph, build_grid
from sorites.measure import (
    MFn,
    ProbSpace,
    ae_eq,
    chebyshev,
    expectation,
    extract_ae_subsequence,
    l1_verdict,
    level_set_sum,
)
from sorites.scale import ScaleContext, decimal_preview, sorites_witness
from sorites.topology import compactness_profile, covering_number, packing_number, sorites_path
from sorites.words import TreeWordMetric, gen_associahedron, gen_hypercube_packing, word_continuum

import oracles

SEED = 20240501
RESULTS: dict[int, tuple[bool, str, float]] = {}


def criterion_1():
    expected = [5, 14, 42, 132, 429, 1430, 4862, 16796, 58786, 208012]
    got = [gen_associahedron(n, diameter_limit=0).meta["node_count"] for n in range(3, 13)]
    return got == expected, "node counts " + " ".join(map(str, got))


def _random_gridfn(rng):
    steps = int(rng.integers(1, 30))
    eps = Fraction(1, int(rng.integers(1, 40)))
    a = int(rng.integers(-5, 6)) * eps
    vals = [Fraction(int(p), int(q)) for p, q in zip(rng.integers(-50, 51, steps + 1), rng.integers(1, 9, steps + 1))]
    return GridFn(GridInterval(a, a + steps * eps, eps), vals)


def criterion_2():
    rng = np.random.default_rng(SEED)
    n = 1000
    bad = []
    # fundamental theorem
    for _ in range(n):
        f = _random_gridfn(rng)
        i, j = sorted(int(v) for v in rng.integers(0, len(f), 2))
        x, y = f.point(i), f.point(j)
        if grid_sum(diff_quotient(f), x, y) != f(y) - f(x):
            bad.append("telescoping")
            break
    # mixed partials
    for _ in range(n):
        dim = int(rng.integers(2, 5))
        doms = [GridInterval(0, int(rng.integers(1, 4)) * Fraction(1, int(q)), Fraction(1, int(q)))
                for q in rng.integers(1, 8, dim)]
        shape = tuple(d.size() for d in doms)
        f = MultiGridFn(doms, rng.integers(-40, 41, size=shape).astype(object), int(rng.integers(1, 20)))
        i, j = (int(v) for v in rng.permutation(dim)[:2])
        if not mixed_partial_check(f, i, j):
            bad.append("mixed partials")
            break
    # Chebyshev and level sets
    for _ in range(n):
        k = int(rng.integers(1, 15))
        space = ProbSpace.from_weights([int(w) for w in rng.integers(1, 30, k)])
        f = MFn([Fraction(int(p), int(q)) for p, q in zip(rng.integers(0, 20, k), rng.integers(1, 6, k))])
        c = Fraction(int(rng.integers(1, 40)), int(rng.integers(1, 6)))
        if not chebyshev(space, f, c).holds:
            bad.append("chebyshev")
            break
        g = MFn([Fraction(int(p), 2) for p in rng.integers(-4, 5, k)])
        if not expectation(space, g) == level_set_sum(space, g):
            bad.append("level sets")
            break
    # ultrametric law, exhaustive
    for kind in ("hyperbolic", "cantor"):
        for omega in range(1, 9):
            t = TreeWordMetric(kind, omega).scaled_table().astype(np.int64)
            if not np.all(t[:, None, :] <= np.maximum(t[:, :, None], t[None, :, :])):
                bad.append(f"ultrametric {kind} {omega}")
    # path metric closed form vs tree shortest paths, exhaustive
    for omega in range(1, 7):
        ws, edges = oracles.binary_tree_edges(omega, lambda depth: 1)
        ref = GraphMetric(WeightedGraph(ws, edges))
        closed = TreeWordMetric("path", omega, "all")
        pos = [closed.index_of(w) for w in ws]
        t = closed.scaled_table()
        for a in range(len(ws)):
            for b in range(len(ws)):
                if Fraction(int(t[pos[a], pos[b]]), closed.scale) != ref.distance(a, b):
                    bad.append(f"path closed form {omega}")
                    break
    return not bad, "1000 instances per identity" if not bad else "broken: " + ", ".join(bad)


def criterion_3():
    gap = abs(exp_product(1, 1000) - exp_partial(1, 1000))
    return gap < Fraction(3, 2000), f"gap ~{decimal_preview(gap, 8)}"


def criterion_4():
    err = abs(exp_partial(1, 50) * exp_partial(-1, 50) - 1)
    bound = sum((Fraction(2**k) / _fact(k) for k in range(51, 101)), Fraction(0))
    return err < Fraction(1, 10**30) and err <= bound, f"error {float(err):.3e}, bound {float(bound):.3e}"


def _fact(k):
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def criterion_5():
    T = 100
    step = exp_partial(Fraction(1, T), T) - 1
    ok = True
    for r in (Fraction(1, 2), Fraction(2), Fraction(3), Fraction(10)):
        y = log_search(r, T)
        lo, hi = exp_partial(y, T), exp_partial(y + Fraction(1, T), T)
        ok &= lo <= r < hi and abs(lo - r) < r * step
    return ok, "r in {1/2, 2, 3, 10}, T=100"


def criterion_6():
    first = root_search(2, 2, Fraction(1, 100))
    rng = np.random.default_rng(SEED + 6)
    ok = first == Fraction(141, 100)
    for _ in range(1000):
        x = Fraction(int(rng.integers(0, 10**5)), int(rng.integers(1, 1000)))
        k = int(rng.integers(1, 6))
        eps = Fraction(1, int(rng.integers(1, 1000)))
        m = root_search(x, k, eps)
        ok &= m**k <= x < (m + eps) ** k
    return ok, f"root_search(2, 2, 1/100) = {first}; 1000 random brackets"


def criterion_7():
    eps = Fraction(1, 10**4)
    p1 = euler_ode(Affine(1), 1, eps)
    p2 = euler_ode(Affine(1), 1 + Fraction(1, 10**6), eps)
    err = abs(p1(1) - exp_partial(1, 100))
    rep = gronwall_check(p1, p2, 1)
    h1 = abs(p2(1) - p1(1))
    bound = Fraction(1, 10**6) * (1 + eps) ** (10**4)
    ok = err < Fraction(6, 10**4) and rep.holds and h1 <= bound
    return ok, f"Euler error ~{decimal_preview(err, 6)}, Gronwall holds={rep.holds}"


def criterion_8():
    ctx = ScaleContext(100)
    cov = covering_number(word_continuum("cantor", 16, ctx, carrier="all"), Fraction(1, 128)).count
    pack = packing_number(word_continuum("hyperbolic", 16, ctx), Fraction(1, 2)).count
    fam = gen_hypercube_packing(2**12)
    dmin = min(Fraction(bin(a ^ b).count("1"), 2**12) for a, b in itertools.combinations(fam.masks, 2))
    ctx_b = ScaleContext(100, compact_budget=10**4)
    big = compactness_profile(build_grid(0, 10**6, 1, ctx_b)).compact_verdict
    fine = compactness_profile(build_grid(0, 1, Fraction(1, 10**6), ctx_b)).compact_verdict
    ok = cov <= 255 and pack >= 256 and dmin >= Fraction(1, 8) and not big and fine
    return ok, f"cover {cov}, pack {pack}, hypercube min d {dmin}, [0,1e6] compact={big}, [0,1] compact={fine}"


def criterion_9():
    w = sorites_witness(ScaleContext(100, mesh=Fraction(1, 10**6)), 1)
    leaves = word_continuum("cantor", 10, ScaleContext(100))
    rng = np.random.default_rng(SEED + 9)
    tried = none = 0
    while tried < 1000:
        x, y = (int(v) for v in rng.integers(0, leaves.n, 2))
        if leaves.indistinguishable(x, y):
            continue
        tried += 1
        none += sorites_path(leaves, x, y) is None
    ok = w.adjacent_indistinguishable and w.endpoints_distinguishable and none == tried
    return ok, f"witness {w.steps} steps; {none}/{tried} Cantor pairs without a chain"


def criterion_10():
    ctx = ScaleContext(100)
    N = 10**4
    space = ProbSpace.uniform(N)
    spike = MFn([N] + [0] * (N - 1))
    l1 = l1_verdict(space, spike, ctx)
    ae = ae_eq(space, spike, MFn([0] * N), ctx)
    n = 64
    sp = ProbSpace.uniform(n)
    # shift 4^-i everywhere plus a moving spike; d1(f_i, 0) = 2 * 4^-i
    fs = [MFn([Fraction(1, 4**i) + (Fraction(n, 4**i) if x == i % n else 0) for x in range(n)]) for i in range(1, 25)]
    rep = extract_ae_subsequence(sp, fs, MFn([0] * n), ctx, depth=10)
    masses_ok = all(m <= Fraction(1, 2**k) for k, m in enumerate(rep.exceptional_mass, start=1))
    ok = not l1.verdict and ae.verdict and rep.certified and masses_ok and len(rep.indices) == 10
    return ok, f"L1 rejected={not l1.verdict}, a.e. accepted={ae.verdict}, depth {len(rep.indices)} certified={rep.certified}"


def criterion_11():
    f = GridFn.from_function(0, 1, Fraction(1, 100), lambda x: x * x)
    x = mean_value_solve(f, Fraction(1, 4))
    eps = Fraction(1, 200)
    g = GridFn.from_function(-1, 1, eps, lambda t: t**3 + t)
    inv = inverse_function(g, 2, ScaleContext(100))
    return x == Fraction(1, 2) and inv.round_trip_error <= eps, f"mvt {x}, round trip error {inv.round_trip_error}"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 12)}


def run_criterion(i: int) -> tuple[bool, str, float]:
    t0 = time.perf_counter()
    ok, measured = CRITERIA[i]()
    res = (bool(ok), measured, time.perf_counter() - t0)
    RESULTS[i] = res
    return res


def format_line(i: int, res) -> str:
    ok, measured, secs = res
    return f"acceptance {i:2d}: {'PASS' if ok else 'FAIL'}  {measured}  ({secs:.1f}s)"


@pytest.mark.parametrize("i", list(range(1, 12)))
def test_acceptance(i):
    res = run_criterion(i)
    print(format_line(i, res))
    assert res[0], res[1]


if __name__ == "__main__":
    for i in CRITERIA:
        print(format_line(i, run_criterion(i)), flush=True)
