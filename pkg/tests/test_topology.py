from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from sorites.continuum import (
    CarrierMap,
    ExplicitTable,
    MeshContinuum,
    build_grid,
    saturate,
)
from sorites.scale import ScaleContext
from sorites.topology import (
    EquicontinuityError,
    accumulation_report,
    ascoli_demo,
    compactness_profile,
    connected_components,
    covering_number,
    packing_number,
    sorites_path,
)
from sorites.words import gen_hypercube_packing, word_continuum

import oracles

CTX = ScaleContext(100)


def _table(C):
    return [[C.distance(i, j) for j in range(C.n)] for i in range(C.n)]


def _verify_cover(C, res):
    t = C.source.scaled_table()
    R = C.scaled_radius(res.radius)
    assert np.all((t[res.centers] <= R).any(axis=0))


def _verify_pack(C, res):
    w = res.witness
    for a in range(len(w)):
        for b in range(a + 1, len(w)):
            assert C.distance(int(w[a]), int(w[b])) >= res.radius


# -- covering and packing ------------------------------------------------


def test_covering_grid_example():
    C = build_grid(0, 1, Fraction(1, 100), CTX)
    res = covering_number(C, Fraction(1, 10))
    balls = oracles.balls_from_table(_table(C), Fraction(1, 10))
    assert res.centers.tolist() == oracles.greedy_cover(balls)
    assert res.count == 5 <= 6
    _verify_cover(C, res)


def test_covering_single_point():
    C = MeshContinuum(ExplicitTable([[0]]), CTX)
    assert covering_number(C, Fraction(1, 7)).count == 1
    assert packing_number(C, 5).count == 1


def test_covering_cantor():
    C = word_continuum("cantor", 16, CTX, carrier="all")
    res = covering_number(C, Fraction(1, 128))
    assert res.count <= 255
    assert res.complete
    covered = C.balls(Fraction(1, 128)).union_mask(res.centers)
    assert covered.all()


def test_packing_grid_example():
    C = build_grid(0, 1, Fraction(1, 100), CTX)
    res = packing_number(C, Fraction(11, 100))
    assert [C.source.point(int(i)) for i in res.witness] == [Fraction(11 * k, 100) for k in range(10)]
    assert res.count == 10
    open_balls = oracles.balls_from_table(_table(C), Fraction(11, 100), closed=False)
    assert res.witness.tolist() == oracles.greedy_pack(open_balls)


def test_packing_equal_labels():
    C = MeshContinuum(ExplicitTable([[0, 1], [1, 0]], labels=["p", "p"]), CTX)
    assert packing_number(C, Fraction(1, 2)).count == 2


def test_packing_hyperbolic():
    C = word_continuum("hyperbolic", 16, CTX)
    res = packing_number(C, Fraction(1, 2))
    assert res.count >= 256
    # spot-check separation on the words u 0^8
    sample = [C.source.index_of(format(u, "08b") + "0" * 8) for u in range(256)]
    assert all(C.distance(sample[0], s) >= Fraction(1, 2) for s in sample[1:])


def test_hypercube_packing_as_continuum_witness():
    pk = gen_hypercube_packing(2**12)
    C = MeshContinuum(
        ExplicitTable(
            [[Fraction(bin(a ^ b).count("1"), pk.omega) for b in pk.masks] for a in pk.masks]
        ),
        CTX,
    )
    assert packing_number(C, Fraction(1, 8)).count == len(pk.masks)


def test_radius_validation_and_limits():
    C = build_grid(0, 1, Fraction(1, 100), CTX)
    with pytest.raises(ValueError):
        covering_number(C, 0)
    with pytest.raises(ValueError):
        packing_number(C, -1)
    part = covering_number(C, Fraction(1, 100), limit=3)
    assert part.count == 3 and not part.complete
    assert not packing_number(C, Fraction(1, 100), limit=3).complete


@st.composite
def small_continua(draw):
    kind = draw(st.sampled_from(["grid", "cantor", "hyperbolic", "path", "table"]))
    A = draw(st.integers(2, 12))
    ctx = ScaleContext(A, compact_budget=draw(st.integers(A, A * A)))
    if kind == "grid":
        den = draw(st.integers(A * A, 3 * A * A))
        return build_grid(0, Fraction(draw(st.integers(1, 60)), den), Fraction(1, den), ctx)
    if kind == "table":
        pts = sorted(draw(st.sets(st.fractions(0, 3, max_denominator=A * A), min_size=1, max_size=30)))
        return MeshContinuum(ExplicitTable([[abs(x - y) for y in pts] for x in pts]), ctx)
    return word_continuum(kind, draw(st.integers(1, 5)), ctx, carrier=draw(st.sampled_from(["leaves", "all"])))


@settings(max_examples=150, deadline=None)
@given(C=small_continua(), r=st.fractions(min_value=Fraction(1, 50), max_value=3, max_denominator=50))
def test_greedy_counts_match_oracle(C, r):
    table = _table(C)
    cov = covering_number(C, r)
    assert cov.centers.tolist() == oracles.greedy_cover(oracles.balls_from_table(table, r))
    pk = packing_number(C, r)
    assert pk.witness.tolist() == oracles.greedy_pack(oracles.balls_from_table(table, r, closed=False))
    _verify_cover(C, cov)
    _verify_pack(C, pk)


# -- compactness ---------------------------------------------------------


def test_compactness_examples():
    ctx = ScaleContext(100, compact_budget=10**4)
    fine = compactness_profile(build_grid(0, 1, Fraction(1, 10**6), ctx))
    assert fine.compact_verdict
    # closed balls of radius 1/100 hold 20001 points, so 50 is optimal
    assert fine.covering_at_threshold == 50 == -(-(10**6 + 1) // 20001)
    assert fine.covering_at_threshold <= 51
    big = compactness_profile(build_grid(0, 10**6, 1, ctx))
    assert not big.compact_verdict
    assert big.packing_at_threshold == 10**4 + 1 and not big.packing_complete
    empty = compactness_profile(build_grid(0, 1, Fraction(1, 100), CTX))
    assert empty.ladder == [] and empty.covering_counts == [] and empty.compact_verdict


def test_profile_exports():
    C = build_grid(0, 1, Fraction(1, 100), CTX)
    p = compactness_profile(C, ["1/10", "1/4"])
    assert p.covering_counts == [5, 2]
    lines = p.to_csv().strip().splitlines()
    assert lines[0] == "radius,covering,packing"
    assert lines[1].startswith("1/10,5,")
    data = p.to_json(C)
    assert data["compact"] is True and data["covering"] == [5, 2]


# -- components and sorites paths ----------------------------------------


def test_components_examples():
    C = build_grid(0, 1, Fraction(1, 10**6), ScaleContext(100, mesh=Fraction(1, 10**6)))
    assert connected_components(C).connected


def test_cantor_totally_disconnected():
    C = word_continuum("cantor", 16, CTX)
    comps = connected_components(C)
    assert comps.count == 256
    for part in comps.parts:
        assert np.array_equal(part, saturate(C, [int(part[0])]))


@settings(max_examples=100, deadline=None)
@given(C=small_continua(), seed=st.integers(0, 2**32 - 1))
def test_components_permutation_invariant(C, seed):
    perm = np.random.default_rng(seed).permutation(C.n)
    t = C.source.scaled_table()
    P = MeshContinuum(ExplicitTable.from_scaled(t[np.ix_(perm, perm)], C.source.scale), C.ctx)
    a, b = connected_components(C), connected_components(P)
    orig = {frozenset(p.tolist()) for p in a.parts}
    moved = {frozenset(perm[p].tolist()) for p in b.parts}
    assert orig == moved
    adj = [[j for j in range(C.n) if j != i and C.indistinguishable(i, j)] for i in range(C.n)]
    assert len(set(oracles.components(adj))) == a.count


def test_sorites_path_grid():
    C = build_grid(0, 1, Fraction(1, 10**6), ScaleContext(100, mesh=Fraction(1, 10**6)))
    p = sorites_path(C, 0, C.n - 1)
    assert p.ok
    # the longest indistinguishable step is 9999/10^6, so 101 hops
    assert p.hops == 101
    assert sorites_path(C, 5, 5) is None


@settings(max_examples=60, deadline=None)
@given(steps=st.integers(2, 80), A=st.integers(2, 6))
def test_sorites_hops_match_bfs(steps, A):
    den = A * A
    C = build_grid(0, Fraction(steps, den), Fraction(1, den), ScaleContext(A))
    adj = [[j for j in range(C.n) if j != i and C.indistinguishable(i, j)] for i in range(C.n)]
    dist = oracles.bfs(adj, 0)
    p = sorites_path(C, 0, C.n - 1)
    if C.indistinguishable(0, C.n - 1):
        assert p is None
    else:
        assert p.hops == dist[-1] and p.ok


def test_sorites_path_none_across_components():
    C = MeshContinuum(ExplicitTable([[0, 1], [1, 0]]), CTX)
    assert sorites_path(C, 0, 1) is None
    with pytest.raises(ValueError):
        sorites_path(C, 0, 5)


@pytest.mark.parametrize("kind", ["cantor", "hyperbolic"])
@settings(max_examples=200, deadline=None)
@given(omega=st.integers(2, 12), A=st.integers(2, 40), data=st.data())
def test_ultrametric_blocks_sorites(kind, omega, A, data):
    C = word_continuum(kind, omega, ScaleContext(A))
    x = data.draw(st.integers(0, C.n - 1))
    y = data.draw(st.integers(0, C.n - 1))
    assume(not C.indistinguishable(x, y))
    assert sorites_path(C, x, y) is None


# -- accumulation --------------------------------------------------------


def test_accumulation_examples():
    C = build_grid(0, 1, Fraction(1, 10**6), ScaleContext(100, mesh=Fraction(1, 10**6)))
    rep = accumulation_report(C)
    assert rep.perfect
    assert rep.neighbor_counts[C.n // 2] == 2 * 10**4 - 2
    pair = build_grid(0, 1, 1, CTX)
    rep = accumulation_report(pair)
    assert rep.isolated.all() and not rep.perfect
    words = word_continuum("cantor", 10, CTX, carrier="all")
    rep = accumulation_report(words)
    assert not rep.perfect and rep.isolated[words.source.index_of("")]


@st.composite
def compact_trees(draw):
    # Cantor carriers are the ones that stay compact while holding more than B^2 points
    omega = draw(st.integers(6, 11))
    A = draw(st.integers(2, 6))
    carrier = draw(st.sampled_from(["leaves", "all"]))
    probe = word_continuum("cantor", omega, ScaleContext(A), carrier)
    need = max(A, compactness_profile(probe).covering_at_threshold, packing_number(probe, probe.ctx.threshold).count)
    B = draw(st.integers(need, need + 3))
    C = word_continuum("cantor", omega, ScaleContext(A, compact_budget=B), carrier)
    assume(C.n > B * B)
    return C


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(C=compact_trees(), seed=st.integers(0, 2**32 - 1))
def test_compact_implies_accumulation(C, seed):
    B = C.ctx.compact_budget
    assert compactness_profile(C).compact_verdict
    sub = np.random.default_rng(seed).choice(C.n, size=B * B + 1, replace=False)
    rep = accumulation_report(C, sub)
    # brute-force neighbor count of the best point
    t = C.source.scaled_table()[:, sub]
    near = (t * C.ctx.horizon < C.source.scale).sum(axis=1)
    near[sub] -= 1
    best = int(near.max())
    assert best == rep.neighbor_counts.max()
    assert 2 * best > B


def test_compact_implies_accumulation_fixed():
    C = word_continuum("cantor", 10, ScaleContext(2, compact_budget=4))
    assert compactness_profile(C).compact_verdict and C.n > 16
    for seed in range(20):
        sub = np.random.default_rng(seed).choice(C.n, size=17, replace=False)
        assert 2 * accumulation_report(C, sub).neighbor_counts.max() > 4


# -- Ascoli --------------------------------------------------------------


def _lipschitz_family(C, count, seed):
    rng = np.random.default_rng(seed)
    fam = []
    for _ in range(count):
        v = np.cumsum(np.concatenate([[int(rng.integers(0, C.n))], rng.choice([-1, 0, 1], size=C.n - 1)]))
        fam.append(CarrierMap(C, C, np.clip(v, 0, C.n - 1).astype(np.int64)))
    return fam


def test_ascoli_identity():
    C = build_grid(0, 1, Fraction(1, 100), ScaleContext(10))
    rep = ascoli_demo(C, C, [CarrierMap.identity(C)])
    assert rep.representatives == 1 and rep.within_threshold


def test_ascoli_lipschitz_family():
    C = build_grid(0, 1, Fraction(1, 100), ScaleContext(4))
    fam = _lipschitz_family(C, 50, 0)
    rep = ascoli_demo(C, C, fam)
    assert rep.representatives <= min(rep.bound, 4**4)
    assert rep.within_threshold
    # recompute each member's distance to its table extension
    a1, a2 = rep.dense_domain, rep.dense_codomain
    for f, phi in zip(fam, rep.tables):
        for x in range(C.n):
            near = min(a1.tolist(), key=lambda a: (C.distance(x, a), a))
            assert C.distance(int(f.images[x]), phi[a1.tolist().index(near)]) < Fraction(1, 4)
    assert all(set(t) <= set(a2.tolist()) for t in rep.tables)


def test_ascoli_rejects_jump():
    C = build_grid(0, 1, Fraction(1, 100), ScaleContext(10))
    step = CarrierMap(C, C, np.where(np.arange(C.n) < 50, 0, 100))
    with pytest.raises(EquicontinuityError) as err:
        ascoli_demo(C, C, [CarrierMap.identity(C), step])
    assert err.value.member == 1
    i, j = err.value.pair
    assert abs(int(step.images[i]) - int(step.images[j])) == 100
