"""Vectors of rationals sharing one denominator.

Grid functions carry thousands of values whose reduced denominators can
run to hundreds of thousands of bits.  Normalizing each entry costs a gcd
per value, which dominates everything else, so values are stored as
Python-int numerators over a single positive denominator and reduced only
when an individual entry is read out.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .scale import as_rational

__all__ = ["ExactArray"]


def _obj(values: Iterable[int]) -> np.ndarray:
    seq = list(values)
    out = np.empty(len(seq), dtype=object)
    out[:] = [int(v) for v in seq]
    return out


class ExactArray:
    """``num[i] / den`` for every ``i``; ``den > 0`` and ``num`` holds Python ints."""

    __slots__ = ("num", "den")

    def __init__(self, num, den: int = 1):
        den = int(den)
        if den <= 0:
            raise ValueError("denominator must be positive")
        if isinstance(num, np.ndarray) and num.dtype == object:
            self.num = num
        else:
            self.num = _obj(num)
        self.den = den

    @classmethod
    def from_rationals(cls, values: Sequence) -> "ExactArray":
        fracs = [as_rational(v) for v in values]
        den = 1
        for f in fracs:
            den = math.lcm(den, f.denominator)
        return cls([f.numerator * (den // f.denominator) for f in fracs], den)

    @classmethod
    def zeros(cls, n: int) -> "ExactArray":
        return cls([0] * n, 1)

    @classmethod
    def full(cls, n: int, value) -> "ExactArray":
        v = as_rational(value)
        return cls([v.numerator] * n, v.denominator)

    def __len__(self) -> int:
        return len(self.num)

    def __getitem__(self, k):
        if isinstance(k, slice):
            return ExactArray(self.num[k].copy(), self.den)
        if isinstance(k, np.ndarray):
            return ExactArray(self.num[k], self.den)
        return Fraction(int(self.num[k]), self.den)

    def __iter__(self):
        for v in self.num:
            yield Fraction(int(v), self.den)

    def tolist(self) -> list[Fraction]:
        return list(self)

    def reduced(self) -> "ExactArray":
        """Divide out the common gcd of all numerators and the denominator."""
        g = self.den
        for v in self.num:
            g = math.gcd(g, int(v))
            if g == 1:
                return self
        return ExactArray(self.num // g, self.den // g)

    def rescaled(self, den: int) -> "ExactArray":
        """Same values over the multiple ``den`` of the current denominator."""
        if den % self.den:
            raise ValueError("target denominator must be a multiple")
        return ExactArray(self.num * (den // self.den), den)

    def _aligned(self, other: "ExactArray") -> tuple[np.ndarray, np.ndarray, int]:
        if self.den == other.den:
            return self.num, other.num, self.den
        den = math.lcm(self.den, other.den)
        return self.num * (den // self.den), other.num * (den // other.den), den

    def _coerce(self, other) -> "ExactArray":
        if isinstance(other, ExactArray):
            return other
        v = as_rational(other)
        return ExactArray.full(len(self), v)

    def __add__(self, other) -> "ExactArray":
        a, b, den = self._aligned(self._coerce(other))
        return ExactArray(a + b, den)

    def __sub__(self, other) -> "ExactArray":
        a, b, den = self._aligned(self._coerce(other))
        return ExactArray(a - b, den)

    def __neg__(self) -> "ExactArray":
        return ExactArray(-self.num, self.den)

    def scale(self, r) -> "ExactArray":
        """Multiply every entry by the rational ``r``."""
        r = as_rational(r)
        return ExactArray(self.num * r.numerator, self.den * r.denominator)

    def __mul__(self, other) -> "ExactArray":
        if isinstance(other, ExactArray):
            return ExactArray(self.num * other.num, self.den * other.den)
        return self.scale(other)

    __rmul__ = __mul__

    def __abs__(self) -> "ExactArray":
        return ExactArray(np.abs(self.num), self.den)

    def diff(self) -> "ExactArray":
        return ExactArray(self.num[1:] - self.num[:-1], self.den)

    def cumsum(self) -> "ExactArray":
        return ExactArray(np.cumsum(self.num).astype(object), self.den)

    def sum(self) -> Fraction:
        return Fraction(int(sum(self.num.tolist())), self.den)

    def argmax(self) -> int:
        # np.argmax returns the first maximal index
        return int(np.argmax(self.num))

    def argmin(self) -> int:
        return int(np.argmin(self.num))

    def max(self) -> Fraction:
        return self[self.argmax()]

    def min(self) -> Fraction:
        return self[self.argmin()]

    def equals(self, other: "ExactArray") -> bool:
        if len(self) != len(other):
            return False
        a, b, _ = self._aligned(other)
        return bool(np.all(a == b))

    def compare_scalar(self, r) -> np.ndarray:
        """Sign of ``self[i] - r`` for every ``i`` as an int8 array."""
        r = as_rational(r)
        lhs = self.num * r.denominator
        rhs = r.numerator * self.den
        return np.sign(lhs - rhs).astype(np.int8)

    def __repr__(self) -> str:
        head = ", ".join(str(v) for v in self.tolist()[:4])
        more = ", ..." if len(self) > 4 else ""
        return f"ExactArray([{head}{more}], n={len(self)})"
