"""Exact functions on interval meshes and the difference calculus over them."""
from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ..continuum import CarrierMap, GridInterval, MeshContinuum, continuity_report
from ..exact import ExactArray
from ..scale import ScaleContext, as_rational, format_rational

__all__ = [
    "GridFn",
    "diff_quotient",
    "grid_sum",
    "mean_value_solve",
    "extrema",
    "TaylorReport",
    "taylor_residual",
    "DifferentiabilityReport",
    "differentiability_verdict",
    "InverseResult",
    "inverse_function",
    "compose",
    "restrict",
]


def _grid(a, b, eps) -> GridInterval:
    # function domains may collapse to a single point
    return GridInterval(a, b, eps, allow_point=True)


class GridFn:
    """Exact rational values on the mesh ``[a, b]_eps``."""

    def __init__(self, domain: GridInterval, values):
        if not isinstance(values, ExactArray):
            values = ExactArray.from_rationals(values)
        if len(values) != domain.size():
            raise ValueError(f"expected {domain.size()} values, got {len(values)}")
        self.domain = domain
        self.values = values

    @classmethod
    def from_function(cls, a, b, eps, fn: Callable[[Fraction], object]) -> "GridFn":
        dom = _grid(a, b, eps)
        return cls(dom, [fn(dom.point(i)) for i in range(dom.size())])

    @classmethod
    def on(cls, domain: GridInterval, fn: Callable[[Fraction], object]) -> "GridFn":
        return cls(domain, [fn(domain.point(i)) for i in range(domain.size())])

    @property
    def eps(self) -> Fraction:
        return self.domain.eps

    def __len__(self) -> int:
        return self.domain.size()

    def point(self, i: int) -> Fraction:
        return self.domain.point(i)

    def index_of(self, x) -> int:
        return self.domain.index_of(x)

    def __call__(self, x) -> Fraction:
        return self.values[self.domain.index_of(x)]

    def __getitem__(self, i: int) -> Fraction:
        return self.values[i]

    def items(self):
        for i in range(len(self)):
            yield self.domain.point(i), self.values[i]

    def as_map(self, ctx: ScaleContext) -> CarrierMap:
        if len(self) < 2:
            raise ValueError("need at least two mesh points")
        C = MeshContinuum(self.domain, ctx, "grid")
        return CarrierMap(C, None, self.values)

    def to_json(self) -> dict:
        d = self.domain
        return {
            "domain": {"a": format_rational(d.a), "b": format_rational(d.b), "eps": format_rational(d.eps)},
            "values": [format_rational(v) for v in self.values],
        }

    @classmethod
    def from_json(cls, data: dict) -> "GridFn":
        d = data["domain"]
        return cls(_grid(d["a"], d["b"], d["eps"]), data["values"])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "value"])
        for x, v in self.items():
            w.writerow([format_rational(x), format_rational(v)])
        return buf.getvalue()


def diff_quotient(f: GridFn) -> GridFn:
    """``(f(x + eps) - f(x)) / eps`` on ``[a, b - eps]``."""
    if len(f) < 2:
        raise ValueError("difference quotient needs at least two mesh points")
    d = f.domain
    return GridFn(_grid(d.a, d.b - d.eps, d.eps), f.values.diff().scale(1 / d.eps))


def grid_sum(f: GridFn, a, b) -> Fraction:
    """``sum_{a <= x < b} f(x) eps``; ``b`` may sit one step past the domain."""
    a, b = as_rational(a), as_rational(b)
    d = f.domain
    ia, ib = (a - d.a) / d.eps, (b - d.a) / d.eps
    if ia.denominator != 1 or ib.denominator != 1:
        raise ValueError("summation bounds must lie on the mesh")
    ia, ib = int(ia), int(ib)
    if not 0 <= ia <= ib <= len(f):
        raise ValueError("summation bounds outside the domain")
    part = ExactArray(f.values.num[ia:ib], f.values.den)
    return part.sum() * d.eps


def mean_value_solve(f: GridFn, c, ctx: ScaleContext | None = None) -> Fraction:
    """First mesh point with ``f(x) >= c``.

    With a context, ``f(a)`` must sit visibly below ``c`` and ``f(b)`` visibly
    above it; without one, plain strict bracketing is required.
    """
    c = as_rational(c)
    lo, hi = f.values[0], f.values[len(f) - 1]
    if ctx is None:
        ok = lo < c < hi
    else:
        ok = c - lo >= ctx.threshold and hi - c >= ctx.threshold
    if not ok:
        raise ValueError("need f(a) below c and f(b) above c")
    signs = f.values.compare_scalar(c)
    i = int(np.argmax(signs >= 0))
    return f.point(i)


@dataclass
class Extrema:
    argmin: object
    min: Fraction
    argmax: object
    max: Fraction


def extrema(f) -> Extrema:
    """Exact global extrema; lowest (flat) index wins ties."""
    from .multi import MultiGridFn

    if isinstance(f, MultiGridFn):
        num = ExactArray(f.num.ravel(), f.den)
        i, j = num.argmin(), num.argmax()
        return Extrema(f.point(np.unravel_index(i, f.shape)), num[i], f.point(np.unravel_index(j, f.shape)), num[j])
    i, j = f.values.argmin(), f.values.argmax()
    return Extrema(f.point(i), f.values[i], f.point(j), f.values[j])


@dataclass
class TaylorReport:
    center: Fraction
    order: int
    exclusion: Fraction
    worst_residual: Fraction
    worst_at: Fraction
    window: int
    verdict: bool
    profile: list = field(default_factory=list, repr=False)

    def to_csv(self) -> str:
        """Residual per admissible point as ``x, value`` rows."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "value"])
        for x, r in self.profile:
            w.writerow([format_rational(x), format_rational(r)])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "center": format_rational(self.center),
            "order": self.order,
            "exclusion": format_rational(self.exclusion),
            "worst_residual": format_rational(self.worst_residual),
            "worst_at": format_rational(self.worst_at),
            "window": self.window,
            "verdict": self.verdict,
        }


def taylor_residual(f: GridFn, a, coeffs: Sequence, order: int, ctx: ScaleContext, delta=None) -> TaylorReport:
    """Worst ``|f(x) - sum c_i (x - a)^i / i!| / |x - a|^n`` over ``delta <= |x - a| < 1/A``."""
    a = as_rational(a)
    f.index_of(a)
    delta = f.eps if delta is None else as_rational(delta)
    if delta < f.eps:
        raise ValueError("exclusion radius below the mesh")
    cs = [as_rational(c) / math.factorial(i) for i, c in enumerate(coeffs)]
    A = ctx.horizon
    worst, worst_x = None, None
    profile = []
    for x, v in f.items():
        h = abs(x - a)
        if not (delta <= h and h * A < 1):
            continue
        poly = Fraction(0)
        for c in reversed(cs):
            poly = poly * (x - a) + c
        res = abs(v - poly) / h**order
        profile.append((x, res))
        if worst is None or res > worst:
            worst, worst_x = res, x
    if worst is None:
        raise ValueError("no admissible point in the window delta <= |x - a| < 1/A")
    return TaylorReport(a, int(order), delta, worst, worst_x, len(profile), worst * A < 1, profile)


def restrict(f: GridFn, factor: int) -> GridFn:
    """Restriction to the coarser mesh ``factor * eps`` starting at ``a``."""
    factor = int(factor)
    if factor < 1:
        raise ValueError("coarsening factor must be positive")
    d = f.domain
    m = d.steps // factor
    dom = _grid(d.a, d.a + m * factor * d.eps, factor * d.eps)
    return GridFn(dom, ExactArray(f.values.num[::factor][: m + 1].copy(), f.values.den))


@dataclass
class DifferentiabilityReport:
    verdict: bool
    coarsening: int | None
    mesh: Fraction | None
    derivative: GridFn | None
    tried: list[int] = field(default_factory=list)


def differentiability_verdict(f: GridFn, ctx: ScaleContext) -> DifferentiabilityReport:
    """Is the difference quotient continuous at scale, at ``eps`` or on a power-of-two coarsening?"""
    tried = []
    L = 1
    while L * f.eps * ctx.horizon < 1:
        g = restrict(f, L) if L > 1 else f
        tried.append(L)
        if len(g) >= 3:
            dq = diff_quotient(g)
            if continuity_report(dq.as_map(ctx)).continuous_at_scale:
                return DifferentiabilityReport(True, L, g.eps, dq, tried)
        L *= 2
    return DifferentiabilityReport(False, None, None, None, tried)


@dataclass
class InverseResult:
    g: GridFn
    window: Fraction
    round_trip_error: Fraction


def inverse_function(f: GridFn, c, ctx: ScaleContext) -> InverseResult:
    """``g(y) = max {x : f(x) <= y}`` on ``[-c, c]_eps`` for ``f`` on ``[-1, 1]_eps``.

    Requires ``f(0) = 0`` and slope at least ``1/A`` on the smallest symmetric
    window ``[-a, a]`` with ``f(-a) <= -c`` and ``f(a) >= c``.
    """
    c = as_rational(c)
    d = f.domain
    eps = d.eps
    if d.a != -1 or d.b != 1:
        raise ValueError("inverse_function expects a function on [-1, 1]")
    if c <= 0 or (c / eps).denominator != 1:
        raise ValueError("c must be a positive multiple of the mesh")
    zero = d.index_of(0)
    if f.values[zero] != 0:
        raise ValueError("f(0) must be 0")
    vals = f.values
    half = d.steps // 2
    w = None
    for k in range(1, half + 1):
        if vals[zero - k] <= -c and vals[zero + k] >= c:
            w = k
            break
    if w is None:
        raise ValueError("f never reaches -c and c on a symmetric window")
    dq = vals.diff().scale(1 / eps)
    thr = ctx.threshold
    for i in range(zero - w, zero + w):
        if dq[i] < thr:
            raise ValueError(f"slope {format_rational(dq[i])} below 1/A at x={format_rational(d.point(i))}")
    # suffix minima: the largest x with f(x) <= y is the largest i with sufmin[i] <= y
    num = vals.num
    sufmin = list(np.minimum.accumulate(num[::-1])[::-1])
    den = vals.den
    gdom = _grid(-c, c, eps)
    out = []
    for j in range(gdom.size()):
        y = gdom.point(j)
        key = y * den
        # sufmin is nondecreasing; count entries <= y
        i = bisect.bisect_right(sufmin, math.floor(key)) - 1
        if i < 0:
            raise ValueError("no preimage at or below y")
        out.append(d.point(i))
    g = GridFn(gdom, out)
    # round trip on the window where f lands in [-c, c]
    worst = Fraction(0)
    for i in range(zero - w, zero + w + 1):
        fx = vals[i]
        if -c <= fx <= c:
            s = math.floor(fx / eps) * eps
            back = g(s)
            worst = max(worst, abs(back - d.point(i)))
    return InverseResult(g, w * eps, worst)


def compose(g: GridFn, f: GridFn) -> GridFn:
    """``g(snap(f(x)))`` on the domain of ``f``, snapping onto ``g``'s mesh."""
    gd = g.domain
    out = []
    for x, v in f.items():
        k = math.floor((v - gd.a) / gd.eps)
        if not 0 <= k < len(g):
            raise ValueError(f"f({format_rational(x)}) snaps outside the domain of g")
        out.append(g.values[k])
    return GridFn(f.domain, out)
