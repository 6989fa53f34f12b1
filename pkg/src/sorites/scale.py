"""Exact rationals and the finite model of accessibility.

A :class:`ScaleContext` fixes a horizon ``A``: integers up to ``A`` are
accessible, everything above is huge.  A rational is infinitesimal when
``|r| < 1/A`` and two rationals are indistinguishable when they differ by
less than ``1/A``.  Every judgment here is an exact integer comparison.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Union

import numpy as np

Rational = Fraction
RationalLike = Union[Fraction, int, str]

__all__ = [
    "Rational",
    "as_rational",
    "format_rational",
    "ScaleContext",
    "Comparison",
    "Magnitude",
    "classify",
    "compare",
    "snap_to_mesh",
    "SoritesWitness",
    "sorites_witness",
]


def as_rational(value: RationalLike) -> Fraction:
    """Coerce ints, ``Fraction`` and ``"p/q"`` strings to an exact rational.

    Floats are rejected: a binary float is almost never the number the
    caller meant, and silently taking its exact expansion hides that.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational literal")
        return Fraction(text)
    if isinstance(value, float):
        raise TypeError(f"refusing float {value!r}; pass a string such as '1/10'")
    # numpy integers, gmpy2 values and other numbers.Rational implementations
    try:
        return Fraction(value)
    except TypeError:
        raise TypeError(f"cannot interpret {value!r} as a rational") from None


def format_rational(r: Fraction) -> str:
    """Canonical wire form: ``"p/q"`` in lowest terms, ``"p"`` when ``q == 1``."""
    r = as_rational(r)
    if r.denominator == 1:
        return str(r.numerator)
    return f"{r.numerator}/{r.denominator}"


def decimal_preview(r: Fraction, digits: int = 12) -> str:
    """Approximate decimal rendering, for display only."""
    r = as_rational(r)
    sign = "-" if r < 0 else ""
    r = abs(r)
    whole = r.numerator // r.denominator
    frac = r - whole
    scaled = frac.numerator * 10**digits // frac.denominator
    if digits == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{scaled:0{digits}d}"


class Comparison(enum.Enum):
    VISIBLY_LESS = "visibly-less"
    INDISTINGUISHABLE = "indistinguishable"
    VISIBLY_GREATER = "visibly-greater"

    def inverse(self) -> "Comparison":
        if self is Comparison.VISIBLY_LESS:
            return Comparison.VISIBLY_GREATER
        if self is Comparison.VISIBLY_GREATER:
            return Comparison.VISIBLY_LESS
        return self


class Magnitude(enum.Enum):
    INFINITESIMAL = "infinitesimal"
    FINITE_POSITIVE = "finite-positive"
    FINITE_NEGATIVE = "finite-negative"
    HUGE_POSITIVE = "huge-positive"
    HUGE_NEGATIVE = "huge-negative"


@dataclass(frozen=True)
class ScaleContext:
    """Accessibility horizon, default mesh and compactness budget."""

    horizon: int
    mesh: Fraction = None  # type: ignore[assignment]
    compact_budget: int = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if isinstance(self.horizon, bool) or not isinstance(self.horizon, (int, np.integer)):
            raise TypeError("horizon must be an integer")
        if self.horizon < 1:
            raise ValueError("horizon must be a positive integer")
        object.__setattr__(self, "horizon", int(self.horizon))
        A = self.horizon
        mesh = Fraction(1, A * A) if self.mesh is None else as_rational(self.mesh)
        if mesh <= 0:
            raise ValueError("mesh must be positive")
        if mesh * A * A > 1:
            raise ValueError(f"mesh {format_rational(mesh)} exceeds 1/A^2 = 1/{A * A}")
        object.__setattr__(self, "mesh", mesh)
        budget = A * A if self.compact_budget is None else int(self.compact_budget)
        if budget < A:
            raise ValueError("compact_budget must be at least the horizon")
        object.__setattr__(self, "compact_budget", budget)

    @property
    def threshold(self) -> Fraction:
        """The indistinguishability threshold ``1/A``."""
        return Fraction(1, self.horizon)

    def is_infinitesimal(self, r: RationalLike) -> bool:
        r = as_rational(r)
        return abs(r.numerator) * self.horizon < r.denominator

    def indistinguishable(self, r: RationalLike, s: RationalLike) -> bool:
        return self.is_infinitesimal(as_rational(r) - as_rational(s))

    def is_accessible(self, n: int) -> bool:
        return abs(n) <= self.horizon

    def to_json(self) -> dict:
        return {
            "horizon": self.horizon,
            "mesh": format_rational(self.mesh),
            "compact_budget": self.compact_budget,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ScaleContext":
        return cls(
            horizon=int(data["horizon"]),
            mesh=as_rational(data["mesh"]) if data.get("mesh") is not None else None,
            compact_budget=data.get("compact_budget"),
        )


def classify(r: RationalLike, ctx: ScaleContext) -> Magnitude:
    r = as_rational(r)
    A = ctx.horizon
    n, d = abs(r.numerator), r.denominator
    if n * A < d:
        return Magnitude.INFINITESIMAL
    if n > A * d:
        return Magnitude.HUGE_POSITIVE if r > 0 else Magnitude.HUGE_NEGATIVE
    return Magnitude.FINITE_POSITIVE if r > 0 else Magnitude.FINITE_NEGATIVE


def compare(r: RationalLike, s: RationalLike, ctx: ScaleContext) -> Comparison:
    """Exact trichotomy: visibly less, indistinguishable or visibly greater."""
    diff = as_rational(s) - as_rational(r)
    if ctx.is_infinitesimal(diff):
        return Comparison.INDISTINGUISHABLE
    return Comparison.VISIBLY_LESS if diff > 0 else Comparison.VISIBLY_GREATER


def snap_to_mesh(s: RationalLike, eps: RationalLike) -> Fraction:
    """Largest multiple of ``eps`` not exceeding ``s``."""
    s, eps = as_rational(s), as_rational(eps)
    if eps <= 0:
        raise ValueError("mesh must be positive")
    return math.floor(s / eps) * eps


@dataclass(frozen=True)
class SoritesWitness:
    """The chain ``0, eps, 2 eps, ..., span`` with its verification verdicts.

    Points are generated on demand; a chain at mesh ``10**-6`` has a
    million entries and the checks never need them as ``Fraction`` objects.
    """

    mesh: Fraction
    steps: int
    horizon: int
    adjacent_indistinguishable: bool = field(default=False)
    endpoints_distinguishable: bool = field(default=False)

    @property
    def span(self) -> Fraction:
        return self.steps * self.mesh

    @property
    def ok(self) -> bool:
        return self.adjacent_indistinguishable and self.endpoints_distinguishable

    def __len__(self) -> int:
        return self.steps + 1

    def __iter__(self) -> Iterator[Fraction]:
        for k in range(self.steps + 1):
            yield k * self.mesh

    def __getitem__(self, k: int) -> Fraction:
        if k < 0:
            k += self.steps + 1
        if not 0 <= k <= self.steps:
            raise IndexError(k)
        return k * self.mesh


def verify_chain(points_scaled: np.ndarray, denominator: int, horizon: int) -> tuple[bool, bool]:
    """Check a chain given as integer numerators over a common denominator.

    Returns ``(adjacent_indistinguishable, endpoints_distinguishable)``.
    """
    pts = np.asarray(points_scaled)
    if pts.size < 2:
        return True, False
    gaps = np.abs(np.diff(pts))
    adjacent = bool(np.all(gaps * horizon < denominator))
    span = abs(pts[-1] - pts[0])
    endpoints = bool(span * horizon >= denominator)
    return adjacent, endpoints


def sorites_witness(ctx: ScaleContext, span: RationalLike) -> SoritesWitness:
    """Build and verify a sorites chain from 0 to ``span`` at the context mesh."""
    span = as_rational(span)
    eps = ctx.mesh
    if span * ctx.horizon < 1:
        raise ValueError(
            f"span {format_rational(span)} is below 1/A; its endpoints are already indistinguishable"
        )
    steps = span / eps
    if steps.denominator != 1 or steps < 2:
        raise ValueError("span must be an integer multiple (at least 2) of the mesh")
    steps = int(steps)
    # Work in units of eps.denominator so every point is an integer numerator.
    unit = eps.numerator
    pts = np.arange(steps + 1, dtype=np.int64) * unit
    adjacent, endpoints = verify_chain(pts, eps.denominator, ctx.horizon)
    return SoritesWitness(eps, steps, ctx.horizon, adjacent, endpoints)
