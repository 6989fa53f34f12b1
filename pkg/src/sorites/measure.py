"""Finite probability spaces with exact densities and scale-relative measure notions."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .exact import ExactArray
from .scale import ScaleContext, as_rational, format_rational

__all__ = [
    "ProbSpace",
    "MFn",
    "measure",
    "expectation",
    "level_set_sum",
    "ChebyshevResult",
    "chebyshev",
    "truncate",
    "L1Report",
    "l1_verdict",
    "d1",
    "AeReport",
    "ae_eq",
    "UnionReport",
    "almost_disjoint_union",
    "LadderUnreachable",
    "SubsequenceReport",
    "extract_ae_subsequence",
]


class ProbSpace:
    """Finitely many labelled points with exact rational weights summing to 1."""

    def __init__(self, points: Sequence, density):
        if not isinstance(density, ExactArray):
            density = ExactArray.from_rationals(density)
        points = [str(p) for p in points]
        if len(points) != len(density):
            raise ValueError("one density value per point")
        if len(points) == 0:
            raise ValueError("empty space")
        if np.any(density.num < 0) or np.any(density.num > density.den):
            raise ValueError("density values must lie in [0, 1]")
        if density.sum() != 1:
            raise ValueError(f"density sums to {format_rational(density.sum())}, not 1")
        self.points = points
        self.density = density

    @classmethod
    def uniform(cls, n: int, labels: Sequence | None = None) -> "ProbSpace":
        labels = list(range(n)) if labels is None else labels
        return cls(labels, ExactArray([1] * n, n))

    @classmethod
    def from_weights(cls, weights: Sequence, labels: Sequence | None = None) -> "ProbSpace":
        """Normalize nonnegative rational weights."""
        w = ExactArray.from_rationals(weights)
        total = int(w.num.sum())
        if total <= 0:
            raise ValueError("weights must have positive total")
        labels = list(range(len(w))) if labels is None else labels
        return cls(labels, ExactArray(w.num, total))

    def __len__(self) -> int:
        return len(self.points)

    def p(self, i: int) -> Fraction:
        return self.density[i]

    def mask(self, subset) -> np.ndarray:
        """Boolean mask from a mask or an iterable of point indices."""
        n = len(self)
        if isinstance(subset, np.ndarray) and subset.dtype == bool:
            if subset.shape != (n,):
                raise ValueError("mask length does not match the space")
            return subset
        m = np.zeros(n, dtype=bool)
        idx = np.fromiter((int(i) for i in subset), dtype=np.int64)
        if len(idx) and (idx.min() < 0 or idx.max() >= n):
            raise ValueError("subset index out of range")
        m[idx] = True
        return m

    def to_json(self) -> dict:
        return {"points": list(self.points), "density": [format_rational(v) for v in self.density]}

    @classmethod
    def from_json(cls, data: dict) -> "ProbSpace":
        return cls(data["points"], data["density"])


class MFn:
    """A rational function on the points of a space, optionally restricted to ``[-M, M]`` on the grid ``1/M``."""

    def __init__(self, values, clamp: int | None = None):
        if not isinstance(values, ExactArray):
            values = ExactArray.from_rationals(values)
        self.values = values
        self.clamp = None if clamp is None else int(clamp)
        if self.clamp is not None:
            M = self.clamp
            if M < 1:
                raise ValueError("clamp must be a positive integer")
            v = values
            # value * M must be an integer in [-M^2, M^2]
            scaled = v.num * M
            if np.any(scaled % v.den != 0):
                raise ValueError("value off the 1/M grid")
            if np.any(np.abs(scaled) > M * M * v.den):
                raise ValueError("value outside [-M, M]")

    @classmethod
    def clamped(cls, values, M: int) -> "MFn":
        """Clip into ``[-M, M]`` and round down onto the grid ``1/M``."""
        v = values if isinstance(values, ExactArray) else ExactArray.from_rationals(values)
        k = (v.num * M) // v.den
        k = np.clip(k, -M * M, M * M)
        return cls(ExactArray(k, M), M)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> Fraction:
        return self.values[i]

    def __sub__(self, other: "MFn") -> "MFn":
        return MFn(self.values - other.values)

    def __abs__(self) -> "MFn":
        return MFn(abs(self.values))

    def to_json(self) -> dict:
        out = {"values": [format_rational(v) for v in self.values]}
        if self.clamp is not None:
            out["clamp"] = self.clamp
        return out


def _fn(f) -> MFn:
    return f if isinstance(f, MFn) else MFn(f)


def _check(space: ProbSpace, f: MFn) -> None:
    if len(f) != len(space):
        raise ValueError("function and space have different sizes")


def measure(space: ProbSpace, subset) -> Fraction:
    m = space.mask(subset)
    return Fraction(int(space.density.num[m].sum()), space.density.den)


def expectation(space: ProbSpace, f) -> Fraction:
    f = _fn(f)
    _check(space, f)
    p, v = space.density, f.values
    return Fraction(int((p.num * v.num).sum()), p.den * v.den)


def level_set_sum(space: ProbSpace, f) -> Fraction:
    """``sum over values lam of lam * m(f = lam)``; equals the expectation."""
    f = _fn(f)
    _check(space, f)
    groups: dict[int, int] = defaultdict(int)
    for v, p in zip(f.values.num, space.density.num):
        groups[int(v)] += int(p)
    total = sum(lam * mass for lam, mass in groups.items())
    return Fraction(total, f.values.den * space.density.den)


@dataclass
class ChebyshevResult:
    lhs: Fraction
    rhs: Fraction
    holds: bool


def chebyshev(space: ProbSpace, f, c) -> ChebyshevResult:
    """``m(f >= c) <= E(f) / c`` for nonnegative ``f``."""
    f = _fn(f)
    _check(space, f)
    c = as_rational(c)
    if c <= 0:
        raise ValueError("c must be positive")
    if np.any(f.values.num < 0):
        raise ValueError("f must be nonnegative")
    lhs = measure(space, f.values.compare_scalar(c) >= 0)
    rhs = expectation(space, f) / c
    return ChebyshevResult(lhs, rhs, lhs <= rhs)


def truncate(f, a) -> MFn:
    """``f`` where ``|f| <= a``, zero elsewhere."""
    f = _fn(f)
    a = as_rational(a)
    v = f.values
    keep = np.abs(v.num) * a.denominator <= a.numerator * v.den
    return MFn(ExactArray(np.where(keep, v.num, 0).astype(object), v.den))


@dataclass
class L1Report:
    verdict: bool
    tails: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "tails": {format_rational(a): format_rational(t) for a, t in self.tails.items()},
        }


def l1_verdict(space: ProbSpace, f, ctx: ScaleContext, ladder: Iterable | None = None) -> L1Report:
    """``E(|f - f^a|) < 1/A`` for every cut ``a`` on a ladder of values beyond ``A``."""
    f = _fn(f)
    _check(space, f)
    A = ctx.horizon
    ladder = [A + 1, 2 * A, A * A] if ladder is None else [as_rational(a) for a in ladder]
    if any(a <= A for a in ladder):
        raise ValueError("ladder values must exceed the horizon")
    tails = {}
    for a in ladder:
        tails[Fraction(a)] = expectation(space, abs(f - truncate(f, a)))
    return L1Report(all(ctx.is_infinitesimal(t) for t in tails.values()), tails)


def d1(space: ProbSpace, f, g) -> Fraction:
    return expectation(space, abs(_fn(f) - _fn(g)))


@dataclass
class AeReport:
    verdict: bool
    exceptional: list[int]
    mass: Fraction


def ae_eq(space: ProbSpace, f, g, ctx: ScaleContext) -> AeReport:
    """Are ``f`` and ``g`` indistinguishable off a set of measure below ``1/A``?"""
    diff = abs(_fn(f) - _fn(g))
    _check(space, diff)
    bad = diff.values.compare_scalar(ctx.threshold) >= 0
    mass = measure(space, bad)
    return AeReport(ctx.is_infinitesimal(mass), [int(i) for i in np.flatnonzero(bad)], mass)


@dataclass
class UnionReport:
    union_measure: Fraction
    sum_of_measures: Fraction
    max_overlap: Fraction
    disjoint: bool
    verdict: bool


def almost_disjoint_union(space: ProbSpace, parts: Sequence, ctx: ScaleContext) -> UnionReport:
    """Compare ``m(union)`` with the sum of part measures.

    Exactly disjoint parts must give equality; otherwise the gap must stay
    below ``len(parts)`` times the largest pairwise overlap.
    """
    if len(parts) > ctx.horizon:
        raise ValueError("more parts than the horizon allows")
    masks = [space.mask(p) for p in parts]
    n = len(space)
    union = np.zeros(n, dtype=bool)
    for m in masks:
        union |= m
    total = sum((measure(space, m) for m in masks), Fraction(0))
    um = measure(space, union)
    overlap = Fraction(0)
    for i in range(len(masks)):
        for j in range(i + 1, len(masks)):
            overlap = max(overlap, measure(space, masks[i] & masks[j]))
    disjoint = not any(np.any(masks[i] & masks[j]) for i in range(len(masks)) for j in range(i + 1, len(masks)))
    if disjoint:
        verdict = um == total
    else:
        verdict = abs(um - total) < len(masks) * overlap
    return UnionReport(um, total, overlap, disjoint, verdict)


class LadderUnreachable(ValueError):
    """No function in the sequence gets within ``4^-k`` of the limit."""

    def __init__(self, k: int, best_k: int):
        super().__init__(f"no index reaches d1 <= 4^-{k}; deepest level reached is {best_k}")
        self.k = k
        self.best_k = best_k


@dataclass
class SubsequenceReport:
    indices: list[int]
    exceptional: list[list[int]]
    exceptional_mass: list[Fraction]
    tail_mass: list[Fraction]
    certified: bool
    null_at_scale: bool

    def to_json(self) -> dict:
        return {
            "indices": self.indices,
            "exceptional": self.exceptional,
            "exceptional_mass": [format_rational(m) for m in self.exceptional_mass],
            "tail_mass": [format_rational(m) for m in self.tail_mass],
            "certified": self.certified,
            "null_at_scale": self.null_at_scale,
        }


def extract_ae_subsequence(space: ProbSpace, fs: Sequence, g, ctx: ScaleContext, depth: int | None = None) -> SubsequenceReport:
    """Pick ``n_k`` (1-based) as the first index with ``d1(f_n, g) <= 4^-k`` for ``k = 1..depth``.

    The exceptional sets ``A_k = {|f_{n_k} - g| >= 2^-k}`` and their tails
    ``B_i = A_i u A_{i+1} u ...`` are checked exactly against ``2^-k`` and
    ``2^(1-i)``, and off each ``B_i`` every later selected function is
    checked to be within ``2^-j`` of ``g``.  The default depth is the first
    ``k`` with ``2^(1-k) < 1/A``.
    """
    g = _fn(g)
    _check(space, g)
    A = ctx.horizon
    if depth is None:
        depth = A.bit_length() + 1
    dists = [d1(space, f, g) for f in fs]
    indices = []
    for k in range(1, depth + 1):
        target = Fraction(1, 4**k)
        hit = next((i for i, d in enumerate(dists) if d <= target), None)
        if hit is None:
            raise LadderUnreachable(k, k - 1)
        indices.append(hit + 1)
    diffs = [abs(_fn(fs[i - 1]) - g) for i in indices]
    masks = []
    masses = []
    ok = True
    for k, diff in enumerate(diffs, start=1):
        m = diff.values.compare_scalar(Fraction(1, 2**k)) >= 0
        masks.append(m)
        mk = measure(space, m)
        masses.append(mk)
        ok &= mk <= Fraction(1, 2**k)
    tails = []
    tail = np.zeros(len(space), dtype=bool)
    tail_masks = []
    for m in reversed(masks):
        tail = tail | m
        tail_masks.append(tail.copy())
    tail_masks.reverse()
    for i, tm in enumerate(tail_masks, start=1):
        mb = measure(space, tm)
        tails.append(mb)
        ok &= mb <= Fraction(2, 2**i)
        off = ~tm
        for j in range(i, depth + 1):
            close = diffs[j - 1].values.compare_scalar(Fraction(1, 2**j)) < 0
            ok &= bool(np.all(close[off]))
    return SubsequenceReport(
        indices,
        [[int(x) for x in np.flatnonzero(m)] for m in masks],
        masses,
        tails,
        bool(ok),
        ctx.is_infinitesimal(tails[-1]) if tails else True,
    )
