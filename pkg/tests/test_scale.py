from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sorites.scale import (
    Comparison,
    Magnitude,
    ScaleContext,
    as_rational,
    classify,
    compare,
    decimal_preview,
    format_rational,
    snap_to_mesh,
    sorites_witness,
)

CTX = ScaleContext(100)

rationals = st.fractions(max_denominator=10**6).filter(lambda r: abs(r) <= 10**4)


def test_context_defaults_and_validation():
    assert CTX.mesh == Fraction(1, 10**4)
    assert CTX.compact_budget == 10**4
    assert CTX.threshold == Fraction(1, 100)
    with pytest.raises(ValueError):
        ScaleContext(100, mesh=Fraction(1, 100))
    with pytest.raises(ValueError):
        ScaleContext(100, compact_budget=99)
    with pytest.raises(ValueError):
        ScaleContext(0)
    with pytest.raises(TypeError):
        ScaleContext(1.5)


def test_context_json_round_trip():
    ctx = ScaleContext(50, mesh="1/10000", compact_budget=77)
    data = ctx.to_json()
    assert data == {"horizon": 50, "mesh": "1/10000", "compact_budget": 77}
    assert ScaleContext.from_json(data) == ctx


def test_wire_format():
    assert format_rational(Fraction(6, 4)) == "3/2"
    assert format_rational(Fraction(-4, 2)) == "-2"
    assert format_rational(Fraction(0)) == "0"
    assert as_rational(" 3/6 ") == Fraction(1, 2)
    with pytest.raises(TypeError):
        as_rational(0.1)
    with pytest.raises(TypeError):
        as_rational(True)
    assert decimal_preview(Fraction(-1, 3), 4) == "-0.3333"


@given(rationals)
def test_wire_round_trip(r):
    assert as_rational(format_rational(r)) == r


@pytest.mark.parametrize(
    "r, expected",
    [
        (0, Magnitude.INFINITESIMAL),
        (Fraction(1, 10**6), Magnitude.INFINITESIMAL),
        (101, Magnitude.HUGE_POSITIVE),
        (-101, Magnitude.HUGE_NEGATIVE),
        (100, Magnitude.FINITE_POSITIVE),
        (Fraction(-1, 100), Magnitude.FINITE_NEGATIVE),
    ],
)
def test_classify_examples(r, expected):
    assert classify(r, CTX) is expected


@pytest.mark.parametrize(
    "r, s, expected",
    [
        (Fraction(1, 3), Fraction(1, 3), Comparison.INDISTINGUISHABLE),
        (0, 1, Comparison.VISIBLY_LESS),
        (0, Fraction(1, 200), Comparison.INDISTINGUISHABLE),
        (0, Fraction(1, 100), Comparison.VISIBLY_LESS),
    ],
)
def test_compare_examples(r, s, expected):
    assert compare(r, s, CTX) is expected


@settings(max_examples=1000)
@given(rationals, rationals, st.integers(1, 1000))
def test_trichotomy(r, s, A):
    ctx = ScaleContext(A)
    c = compare(r, s, ctx)
    d = s - r
    holds = [d >= Fraction(1, A), abs(d) < Fraction(1, A), -d >= Fraction(1, A)]
    assert sum(holds) == 1
    assert holds[[Comparison.VISIBLY_LESS, Comparison.INDISTINGUISHABLE, Comparison.VISIBLY_GREATER].index(c)]
    assert compare(s, r, ctx) is c.inverse()


@given(rationals, st.integers(1, 1000))
def test_classify_matches_definition(r, A):
    m = classify(r, ScaleContext(A))
    if abs(r) < Fraction(1, A):
        assert m is Magnitude.INFINITESIMAL
    elif abs(r) > A:
        assert m is (Magnitude.HUGE_POSITIVE if r > 0 else Magnitude.HUGE_NEGATIVE)
    else:
        assert m is (Magnitude.FINITE_POSITIVE if r > 0 else Magnitude.FINITE_NEGATIVE)


@st.composite
def congruent_pairs(draw):
    A = draw(st.integers(1, 200))
    delta = draw(st.fractions(min_value=Fraction(1, 10**6), max_value=1, max_denominator=10**6))
    bounded = st.fractions(min_value=-A, max_value=A, max_denominator=10**4)
    out = []
    for _ in range(2):
        r = draw(bounded)
        shift = draw(st.fractions(min_value=0, max_value=1, max_denominator=10**4)) * delta
        s = r + shift if r + shift <= A else r - shift
        if shift == delta:
            s = r
        out.append((r, s))
    return A, delta, out


@settings(max_examples=1000)
@given(congruent_pairs())
def test_congruence_bounds(case):
    A, delta, ((r1, s1), (r2, s2)) = case
    assert abs(r1 * r2 - s1 * s2) <= 2 * A * delta
    assert abs((r1 + r2) - (s1 + s2)) <= 2 * delta


@settings(max_examples=1000)
@given(st.integers(1, 200), st.data())
def test_inverse_congruence(k, data):
    big = st.fractions(min_value=Fraction(1, k), max_value=10**3, max_denominator=10**4)
    r = data.draw(big) * data.draw(st.sampled_from([1, -1]))
    s = data.draw(big) * data.draw(st.sampled_from([1, -1]))
    assert abs(1 / r - 1 / s) <= k * k * abs(r - s)


@pytest.mark.parametrize(
    "s, eps, expected",
    [
        (Fraction(7, 10), Fraction(1, 4), Fraction(1, 2)),
        (Fraction(3, 4), Fraction(1, 4), Fraction(3, 4)),
        (Fraction(-1, 10), Fraction(1, 4), Fraction(-1, 4)),
    ],
)
def test_snap_examples(s, eps, expected):
    assert snap_to_mesh(s, eps) == expected


@given(rationals, st.fractions(min_value=Fraction(1, 10**4), max_value=10, max_denominator=10**4))
def test_snap_properties(s, eps):
    t = snap_to_mesh(s, eps)
    assert 0 <= s - t < eps
    assert (t / eps).denominator == 1
    assert snap_to_mesh(t, eps) == t


def test_snap_rejects_nonpositive_mesh():
    with pytest.raises(ValueError):
        snap_to_mesh(1, 0)


def test_sorites_witness_million_steps():
    w = sorites_witness(ScaleContext(100, mesh=Fraction(1, 10**6)), 1)
    assert len(w) == 10**6 + 1
    assert w.adjacent_indistinguishable and w.endpoints_distinguishable and w.ok
    assert w[0] == 0 and w[-1] == 1 and w[1] == Fraction(1, 10**6)


def test_sorites_witness_tenth():
    w = sorites_witness(ScaleContext(100, mesh=Fraction(1, 10**4)), Fraction(1, 10))
    assert len(w) == 1001 and w.ok
    pts = list(w)
    # brute-force check from the definitions
    assert all(compare(a, b, CTX) is Comparison.INDISTINGUISHABLE for a, b in zip(pts, pts[1:]))
    assert compare(pts[0], pts[-1], CTX) is Comparison.VISIBLY_LESS


def test_sorites_witness_rejects_short_span():
    with pytest.raises(ValueError):
        sorites_witness(ScaleContext(100, mesh=Fraction(1, 10**6)), Fraction(1, 200))
    with pytest.raises(ValueError):
        sorites_witness(ScaleContext(100), Fraction(1, 3))


@settings(max_examples=200)
@given(st.integers(2, 60), st.integers(2, 40))
def test_sorites_chain_needs_more_than_A_steps(A, extra):
    ctx = ScaleContext(A)
    w = sorites_witness(ctx, Fraction(extra, A))
    assert w.ok
    assert w.steps > A
    assert math.isclose(float(w.span), extra / A)
