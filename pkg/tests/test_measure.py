from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sorites.measure import (
    LadderUnreachable,
    MFn,
    ProbSpace,
    ae_eq,
    almost_disjoint_union,
    chebyshev,
    d1,
    expectation,
    extract_ae_subsequence,
    l1_verdict,
    level_set_sum,
    measure,
    truncate,
)
from sorites.scale import ScaleContext

CTX = ScaleContext(100)
U4 = ProbSpace.uniform(4)


@st.composite
def spaces(draw, max_n=12):
    n = draw(st.integers(1, max_n))
    w = draw(st.lists(st.integers(0, 20), min_size=n, max_size=n).filter(lambda w: sum(w) > 0))
    return ProbSpace.from_weights(w)


def fns(n, lo=-20, hi=20):
    return st.lists(st.fractions(min_value=lo, max_value=hi, max_denominator=12), min_size=n, max_size=n)


def test_space_validation_and_json():
    with pytest.raises(ValueError):
        ProbSpace([0, 1], [Fraction(1, 2), Fraction(1, 3)])
    with pytest.raises(ValueError):
        ProbSpace([0, 1], [Fraction(3, 2), Fraction(-1, 2)])
    with pytest.raises(ValueError):
        ProbSpace([], [])
    sp = ProbSpace(["a", "b", "c"], ["1/2", "1/3", "1/6"])
    back = ProbSpace.from_json(json.loads(json.dumps(sp.to_json())))
    assert back.points == sp.points and list(back.density) == list(sp.density)


def test_mfn_clamp():
    f = MFn.clamped([Fraction(7, 3), -5, 1], 2)
    assert list(f.values) == [2, -2, 1]
    with pytest.raises(ValueError):
        MFn([Fraction(1, 3)], clamp=2)
    with pytest.raises(ValueError):
        MFn([5], clamp=2)
    assert MFn([Fraction(3, 2)], clamp=2).to_json() == {"values": ["3/2"], "clamp": 2}


def test_measure_examples():
    assert measure(U4, range(4)) == 1
    assert measure(U4, [1, 3]) == Fraction(1, 2)
    assert measure(U4, []) == 0
    with pytest.raises(ValueError):
        measure(U4, [4])


@settings(max_examples=300, deadline=None)
@given(spaces(), st.data())
def test_inclusion_exclusion(sp, data):
    sub = st.sets(st.integers(0, len(sp) - 1))
    a, b = data.draw(sub), data.draw(sub)
    assert measure(sp, a | b) == measure(sp, a) + measure(sp, b) - measure(sp, a & b)
    assert measure(sp, a) == sum((sp.p(i) for i in a), Fraction(0))


def test_expectation_examples():
    assert expectation(U4, [Fraction(5, 7)] * 4) == Fraction(5, 7)
    assert expectation(U4, [0, 1, 2, 3]) == Fraction(3, 2)
    with pytest.raises(ValueError):
        expectation(U4, [1, 2])


@settings(max_examples=1000, deadline=None)
@given(spaces(), st.data())
def test_level_set_identity(sp, data):
    f = data.draw(fns(len(sp), -3, 3))
    direct = sum((sp.p(i) * f[i] for i in range(len(sp))), Fraction(0))
    levels = sum((lam * measure(sp, [i for i in range(len(sp)) if f[i] == lam]) for lam in set(f)), Fraction(0))
    assert expectation(sp, f) == level_set_sum(sp, f) == direct == levels


def test_chebyshev_examples():
    r = chebyshev(U4, [0, 1, 2, 3], 2)
    assert (r.lhs, r.rhs, r.holds) == (Fraction(1, 2), Fraction(3, 4), True)
    z = chebyshev(U4, [0] * 4, Fraction(1, 9))
    assert (z.lhs, z.rhs, z.holds) == (0, 0, True)
    c = chebyshev(U4, [Fraction(2, 3)] * 4, Fraction(2, 3))
    assert c.lhs == c.rhs == 1 and c.holds
    with pytest.raises(ValueError):
        chebyshev(U4, [0, -1, 0, 0], 1)
    with pytest.raises(ValueError):
        chebyshev(U4, [0, 1, 0, 0], 0)


@settings(max_examples=1000, deadline=None)
@given(spaces(), st.data())
def test_chebyshev_always_holds(sp, data):
    f = data.draw(fns(len(sp), 0, 20))
    c = data.draw(st.fractions(min_value=Fraction(1, 50), max_value=25, max_denominator=50))
    r = chebyshev(sp, f, c)
    assert r.lhs == measure(sp, [i for i in range(len(sp)) if f[i] >= c])
    assert r.rhs == expectation(sp, f) / c
    assert r.holds


def test_truncate():
    assert list(truncate([-5, 2, 3, Fraction(7, 2)], 3).values) == [0, 2, 3, 0]


def test_l1_examples():
    bounded = l1_verdict(U4, [100, -100, 3, 0], CTX)
    assert bounded.verdict and set(bounded.tails.values()) == {0}
    N = 10**4
    spike = [N] + [0] * (N - 1)
    sp = ProbSpace.uniform(N)
    rep = l1_verdict(sp, spike, CTX, ladder=[200])
    assert not rep.verdict and rep.tails[Fraction(200)] == 1
    assert not l1_verdict(sp, spike, CTX).verdict
    with pytest.raises(ValueError):
        l1_verdict(sp, spike, CTX, ladder=[100])


def test_l1_tiny_spike_mass():
    # one atom of mass 10^-6 carrying value S: the tail is exactly S / 10^6
    M = 10**6
    sp = ProbSpace.from_weights([1, M - 1])
    for S, ok in ((5000, True), (20000, False)):
        rep = l1_verdict(sp, [S, 0], CTX)
        assert rep.tails[Fraction(101)] == rep.tails[Fraction(200)] == Fraction(S, M)
        assert rep.tails[Fraction(10**4)] == (0 if S <= 10**4 else Fraction(S, M))
        assert rep.verdict is ok


@settings(max_examples=300, deadline=None)
@given(spaces(), st.data())
def test_d1_is_pseudometric(sp, data):
    f, g, h = (data.draw(fns(len(sp))) for _ in range(3))
    assert d1(sp, f, f) == 0
    assert d1(sp, f, g) == d1(sp, g, f) >= 0
    assert d1(sp, f, h) <= d1(sp, f, g) + d1(sp, g, h)


def test_ae_examples():
    N = 10**4
    sp = ProbSpace.uniform(N)
    f = [1, 2] * (N // 2)
    same = ae_eq(sp, f, f, CTX)
    assert same.verdict and same.exceptional == [] and d1(sp, f, f) == 0
    spike = [N] + [0] * (N - 1)
    rep = ae_eq(sp, spike, [0] * N, CTX)
    assert rep.verdict and rep.exceptional == [0] and rep.mass == Fraction(1, N)
    assert d1(sp, spike, [0] * N) == 1
    off = ae_eq(sp, [1] * N, [0] * N, CTX)
    assert not off.verdict and off.mass == 1


@settings(max_examples=500, deadline=None)
@given(spaces(), st.data(), st.integers(2, 40))
def test_l1_small_sets_carry_small_mass(sp, data, A):
    # E(|f| chi_S) <= a m(S) + E(|f - f^a|) for every cut a; with m(S) below
    # 1/A^2 and f passing the verdict, the bound gives < 1/A whenever a m(S) is small enough
    ctx = ScaleContext(A)
    f = data.draw(fns(len(sp), -3 * A, 3 * A))
    rep = l1_verdict(sp, f, ctx)
    S = [i for i in data.draw(st.sets(st.integers(0, len(sp) - 1))) if sp.p(i) * A * A < 1]
    mS = measure(sp, S)
    if mS * A * A >= 1:
        return
    mass = sum((abs(f[i]) * sp.p(i) for i in S), Fraction(0))
    for a, tail in rep.tails.items():
        bound = a * mS + tail
        assert mass <= bound
        if rep.verdict and bound * A < 1:
            assert mass * A < 1


def test_union_examples():
    N = 10**6
    sp = ProbSpace.uniform(N)
    parts = [range(0, 10), range(10, 30), range(30, 31)]
    ex = almost_disjoint_union(sp, parts, CTX)
    assert ex.disjoint and ex.verdict and ex.union_measure == ex.sum_of_measures == Fraction(31, N)
    shared = almost_disjoint_union(sp, [range(0, 10), range(9, 20)], CTX)
    assert not shared.disjoint and shared.sum_of_measures - shared.union_measure == Fraction(1, N)
    assert shared.max_overlap == Fraction(1, N) and shared.verdict
    one = almost_disjoint_union(sp, [range(5)], CTX)
    assert one.verdict and one.union_measure == one.sum_of_measures
    with pytest.raises(ValueError):
        almost_disjoint_union(sp, [[i] for i in range(101)], CTX)


@settings(max_examples=300, deadline=None)
@given(spaces(), st.data())
def test_union_matches_brute_force(sp, data):
    parts = data.draw(st.lists(st.sets(st.integers(0, len(sp) - 1)), min_size=1, max_size=5))
    rep = almost_disjoint_union(sp, parts, CTX)
    union = set().union(*parts)
    assert rep.union_measure == sum((sp.p(i) for i in union), Fraction(0))
    assert rep.sum_of_measures == sum((measure(sp, p) for p in parts), Fraction(0))
    overlaps = [measure(sp, a & b) for k, a in enumerate(parts) for b in parts[k + 1 :]]
    assert rep.max_overlap == max(overlaps, default=Fraction(0))
    assert rep.disjoint == all(not (a & b) for k, a in enumerate(parts) for b in parts[k + 1 :])


def test_subsequence_constant():
    sp = ProbSpace.uniform(8)
    g = [Fraction(i, 3) for i in range(8)]
    rep = extract_ae_subsequence(sp, [g] * 5, g, ScaleContext(10))
    assert rep.indices == [1] * 5 and all(a == [] for a in rep.exceptional)
    assert rep.certified and rep.null_at_scale


def test_subsequence_geometric_shift():
    sp = ProbSpace.uniform(6)
    g = [0, 1, 2, 3, 4, 5]
    fs = [[v + Fraction(1, 4**i) for v in g] for i in range(1, 8)]
    rep = extract_ae_subsequence(sp, fs, g, ScaleContext(10), depth=6)
    assert rep.indices == [1, 2, 3, 4, 5, 6]
    assert all(a == [] for a in rep.exceptional) and rep.certified


def test_subsequence_moving_spike():
    # f_i is 1 on a single atom of mass 4^-i
    depth = 5
    weights = [4 ** (depth + 2 - i) for i in range(1, depth + 2)]
    weights.append(4 ** (depth + 2) - sum(weights))
    sp = ProbSpace.from_weights(weights)
    n = len(weights)
    fs = [[1 if j == i else 0 for j in range(n)] for i in range(depth + 1)]
    rep = extract_ae_subsequence(sp, fs, [0] * n, ScaleContext(10), depth=depth)
    assert rep.indices == list(range(1, depth + 1))
    assert rep.exceptional == [[k] for k in range(depth)]
    assert rep.certified
    assert rep.tail_mass[0] <= 1
    for k, m in enumerate(rep.exceptional_mass, start=1):
        assert m == Fraction(1, 4**k)
    assert json.loads(json.dumps(rep.to_json()))["indices"] == rep.indices


def test_subsequence_unreachable():
    sp = ProbSpace.uniform(2)
    with pytest.raises(LadderUnreachable) as err:
        extract_ae_subsequence(sp, [[Fraction(1, 4), 0], [Fraction(1, 8), 0]], [0, 0], ScaleContext(10), depth=4)
    assert err.value.k == 3 and err.value.best_k == 2


@settings(max_examples=300, deadline=None)
@given(spaces(max_n=8), st.data())
def test_subsequence_bounds_hold_when_returned(sp, data):
    n = len(sp)
    g = data.draw(fns(n, -2, 2))
    depth = data.draw(st.integers(1, 4))
    fs = []
    for i in range(1, depth + 3):
        noise = data.draw(st.lists(st.fractions(min_value=-1, max_value=1, max_denominator=8), min_size=n, max_size=n))
        fs.append([gv + e / 2 ** (2 * i) for gv, e in zip(g, noise)])
    try:
        rep = extract_ae_subsequence(sp, fs, g, ScaleContext(10), depth=depth)
    except LadderUnreachable:
        return
    assert rep.certified
    for k, m in enumerate(rep.exceptional_mass, start=1):
        assert m <= Fraction(1, 2**k)
    for i, m in enumerate(rep.tail_mass, start=1):
        assert m <= Fraction(2, 2**i)
    dists = [d1(sp, f, g) for f in fs]
    for k, idx in enumerate(rep.indices, start=1):
        assert dists[idx - 1] <= Fraction(1, 4**k)
        assert all(d > Fraction(1, 4**k) for d in dists[: idx - 1])
