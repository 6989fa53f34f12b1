"""Functions on products of interval meshes: partial differences and implicit solves."""
from __future__ import annotations

import bisect
import itertools
import math
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ..continuum import GridInterval
from ..scale import ScaleContext, as_rational, format_rational

__all__ = ["MultiGridFn", "partial_diff", "mixed_partial_check", "implicit_solve", "MAX_DIMENSION"]

MAX_DIMENSION = 4


class MultiGridFn:
    """Dense table over ``G_1 x ... x G_n`` stored as integer numerators over one denominator."""

    def __init__(self, domains: Sequence[GridInterval], num, den: int = 1):
        domains = list(domains)
        if not 1 <= len(domains) <= MAX_DIMENSION:
            raise ValueError(f"dimension must be between 1 and {MAX_DIMENSION}")
        num = np.asarray(num, dtype=object)
        shape = tuple(d.size() for d in domains)
        if num.shape != shape:
            raise ValueError(f"table shape {num.shape} does not match the domain {shape}")
        if den <= 0:
            raise ValueError("denominator must be positive")
        self.domains = domains
        self.num = num
        self.den = int(den)

    @classmethod
    def from_rationals(cls, domains: Sequence[GridInterval], values) -> "MultiGridFn":
        vals = np.asarray(values, dtype=object)
        flat = [as_rational(v) for v in vals.ravel()]
        den = math.lcm(*(v.denominator for v in flat)) if flat else 1
        num = np.array([v.numerator * (den // v.denominator) for v in flat], dtype=object)
        return cls(domains, num.reshape(vals.shape), den)

    @classmethod
    def from_function(cls, domains: Sequence[GridInterval], fn: Callable[..., object]) -> "MultiGridFn":
        domains = list(domains)
        shape = tuple(d.size() for d in domains)
        vals = np.empty(shape, dtype=object)
        for idx in itertools.product(*(range(s) for s in shape)):
            vals[idx] = fn(*(d.point(i) for d, i in zip(domains, idx)))
        return cls.from_rationals(domains, vals)

    @property
    def ndim(self) -> int:
        return len(self.domains)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.num.shape

    @property
    def values(self) -> np.ndarray:
        """Object array of Fractions; built on demand."""
        out = np.empty(self.shape, dtype=object)
        flat = out.reshape(-1)
        for k, v in enumerate(self.num.ravel()):
            flat[k] = Fraction(v, self.den)
        return out

    def point(self, idx) -> tuple[Fraction, ...]:
        return tuple(d.point(int(i)) for d, i in zip(self.domains, idx))

    def __getitem__(self, idx) -> Fraction:
        return Fraction(self.num[tuple(idx)], self.den)

    def __call__(self, *xs) -> Fraction:
        return self[tuple(d.index_of(x) for d, x in zip(self.domains, xs))]

    def equals(self, other: "MultiGridFn") -> bool:
        if self.shape != other.shape:
            return False
        return bool(np.all(self.num * other.den == other.num * self.den))

    def to_json(self) -> dict:
        return {
            "domains": [
                {"a": format_rational(d.a), "b": format_rational(d.b), "eps": format_rational(d.eps)}
                for d in self.domains
            ],
            "shape": list(self.shape),
            "values": [format_rational(Fraction(v, self.den)) for v in self.num.ravel()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "MultiGridFn":
        doms = [GridInterval(d["a"], d["b"], d["eps"], allow_point=True) for d in data["domains"]]
        vals = np.array([as_rational(v) for v in data["values"]], dtype=object)
        return cls.from_rationals(doms, vals.reshape(data["shape"]))


def partial_diff(f: MultiGridFn, i: int) -> MultiGridFn:
    """Forward difference quotient along axis ``i``.

    At the top face the forward step leaves the mesh, so the value is copied
    from the point one step below (the reflection rule).
    """
    if not 0 <= i < f.ndim:
        raise ValueError(f"axis {i} out of range")
    if f.shape[i] < 2:
        raise ValueError("axis has a single point")
    eps = f.domains[i].eps
    d = np.diff(f.num, axis=i)
    last = np.take(d, [d.shape[i] - 1], axis=i)
    d = np.concatenate([d, last], axis=i)
    # (diff / den) / (p/q) = diff * q / (den * p)
    return MultiGridFn(f.domains, d * eps.denominator, f.den * eps.numerator)


def mixed_partial_check(f: MultiGridFn, i: int, j: int) -> bool:
    """Exact comparison of the two orders of second partial differences."""
    if f.ndim < 2:
        raise ValueError("mixed partials need at least two variables")
    return partial_diff(partial_diff(f, i), j).equals(partial_diff(partial_diff(f, j), i))


def implicit_solve(f: MultiGridFn, c, ctx: ScaleContext) -> MultiGridFn:
    """``g(x, y) = max {u : f(x, u) <= y}`` on ``[-cx, cx] x [-cy, cy]``.

    ``c`` is one half-width or a pair ``(cx, cy)``; ``u`` runs over the whole
    second axis of ``f``.  For each ``x`` in the region ``f(x, .)`` must have
    slope at least ``1/A`` and bracket ``[-cy, cy]`` between its end values.
    """
    if f.ndim != 2:
        raise ValueError("implicit_solve expects a function of two variables")
    if isinstance(c, (tuple, list)):
        cx, cy = (as_rational(v) for v in c)
    else:
        cx = cy = as_rational(c)
    gx, gu = f.domains
    if f(0, 0) != 0:
        raise ValueError("f(0, 0) must be 0")
    if cx < 0 or cy < 0:
        raise ValueError("region half-widths must be nonnegative")
    rx = GridInterval(-cx, cx, gx.eps, allow_point=True)
    ry = GridInterval(-cy, cy, gu.eps, allow_point=True)
    i0 = gx.index_of(-cx)
    gx.index_of(cx)
    rows = rx.size()
    den = f.den
    thr = ctx.threshold
    dq = partial_diff(f, 1)
    # slope test on the region rows, top face excluded (it repeats the face below)
    slope = dq.num[i0 : i0 + rows, :-1]
    bad = np.argwhere(slope * thr.denominator < thr.numerator * dq.den)
    if len(bad):
        r, k = bad[0]
        x, u = gx.point(i0 + int(r)), gu.point(int(k))
        raise ValueError(f"slope in u below 1/A at (x, u) = ({format_rational(x)}, {format_rational(u)})")
    lo_ok = f.num[i0 : i0 + rows, 0] * cy.denominator <= -cy.numerator * den
    hi_ok = f.num[i0 : i0 + rows, -1] * cy.denominator >= cy.numerator * den
    miss = np.flatnonzero(~(lo_ok & hi_ok))
    if len(miss):
        x = gx.point(i0 + int(miss[0]))
        raise ValueError(f"f(x, .) does not bracket [-cy, cy] at x = {format_rational(x)}")
    ys = [math.floor(ry.point(j) * den) for j in range(ry.size())]
    out = np.empty((rows, ry.size()), dtype=object)
    for r in range(rows):
        row = list(f.num[i0 + r])
        for j, key in enumerate(ys):
            k = bisect.bisect_right(row, key) - 1
            out[r, j] = gu.point(k)
    return MultiGridFn.from_rationals([rx, ry], out)
