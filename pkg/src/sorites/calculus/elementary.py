"""Elementary functions by truncated series and bounded search."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..exact import ExactArray
from ..scale import ScaleContext, as_rational

__all__ = [
    "exp_partial",
    "exp_product",
    "exp_tail_bound",
    "log_search",
    "root_search",
    "power_general",
    "SeriesTail",
    "series_tail_profile",
]


def exp_partial(r, T: int) -> Fraction:
    """``sum_{i=0}^{T} r^i / i!`` exactly."""
    r = as_rational(r)
    T = int(T)
    if T < 0:
        raise ValueError("T must be nonnegative")
    p, q = r.numerator, r.denominator
    # Horner on 1 + r/1 (1 + r/2 (1 + ... (1 + r/T))), kept unreduced
    num, den = 1, 1
    for k in range(T, 0, -1):
        num, den = k * q * den + p * num, k * q * den
    return Fraction(num, den)


def exp_product(r, T: int) -> Fraction:
    """``(1 + r/T)^T`` exactly."""
    T = int(T)
    if T < 1:
        raise ValueError("T must be positive")
    return (1 + as_rational(r) / T) ** T


def exp_tail_bound(s, T: int) -> Fraction:
    """``sum_{k=T+1}^{2T} s^k / k!``: the remainder in the product rule for partial sums."""
    s = as_rational(s)
    term = Fraction(1)
    for k in range(1, T + 1):
        term = term * s / k
    total = Fraction(0)
    for k in range(T + 1, 2 * T + 1):
        term = term * s / k
        total += term
    return total


def log_search(r, T: int = 100) -> Fraction:
    """Largest ``y = k/T`` with ``exp_partial(y, T) <= r``, ``|k| <= T^2``.

    Positive ``k`` use binary search on ``[0, T^2]``.  For ``r < 1`` the
    search gallops down ``k = -1, -2, -4, ...`` first: the partial sum is
    only monotone on a window left of zero, and galloping keeps the search
    near the answer.  The result is always checked against both brackets.
    """
    r = as_rational(r)
    T = int(T)
    if T < 1:
        raise ValueError("T must be positive")
    if r <= 0:
        raise ValueError("logarithm needs r > 0")
    if r >= exp_partial(T, T):
        raise ValueError("r is at or above exp(T, T); outside the search bracket")

    def e(k: int) -> Fraction:
        return exp_partial(Fraction(k, T), T)

    if r >= 1:
        lo, hi = 0, T * T
        # invariant: e(lo) <= r < e(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if e(mid) <= r:
                lo = mid
            else:
                hi = mid
        k = lo
    else:
        upper, step = 0, 1
        while True:
            cand = -step
            if cand < -T * T:
                cand = -T * T
            if e(cand) <= r:
                break
            if cand == -T * T:
                raise ValueError("no bracket found down to -T^2")
            upper = cand
            step *= 2
        lo, hi = cand, upper
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if e(mid) <= r:
                lo = mid
            else:
                hi = mid
        k = lo
    if not (e(k) <= r < e(k + 1)):
        raise ArithmeticError(f"bracketing failed at k={k}")
    return Fraction(k, T)


def root_search(x, k: int, eps) -> Fraction:
    """``m * eps`` with ``(m eps)^k <= x < ((m + 1) eps)^k``."""
    x, eps = as_rational(x), as_rational(eps)
    k = int(k)
    if x < 0:
        raise ValueError("root of a negative number")
    if k < 1:
        raise ValueError("k must be at least 1")
    if eps <= 0:
        raise ValueError("mesh must be positive")
    p, q = eps.numerator, eps.denominator
    a, b = x.numerator, x.denominator
    lhs_p, rhs_q = p**k * b, a * q**k

    def fits(m: int) -> bool:
        # (m p / q)^k <= a / b
        return m**k * lhs_p <= rhs_q

    hi = 1
    while fits(hi):
        hi *= 2
    lo = hi // 2 if hi > 1 else 0
    # fits(lo) and not fits(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fits(mid):
            lo = mid
        else:
            hi = mid
    return lo * eps


def power_general(x, y, T: int = 100, ctx: ScaleContext | None = None) -> Fraction:
    """``x^y`` as ``exp_partial(y * log_search(x, T), T)``."""
    x, y = as_rational(x), as_rational(y)
    if x <= 0:
        raise ValueError("power needs x > 0")
    if ctx is not None and abs(y) > ctx.horizon:
        raise ValueError("exponent beyond the horizon")
    return exp_partial(y * log_search(x, T), T)


@dataclass
class SeriesTail:
    converges: bool
    worst_tail: Fraction
    worst_start: int | None


def series_tail_profile(a: Sequence, ctx: ScaleContext) -> SeriesTail:
    """Largest ``|sum_{i=I}^{N} a_i|`` over huge starts ``A < I <= N`` (1-based)."""
    A = ctx.horizon
    vals = ExactArray.from_rationals(a)
    N = len(vals)
    if N <= A:
        return SeriesTail(True, Fraction(0), None)
    tail = vals[A:]
    # suffix sums, index 0 is I = A + 1
    suffix = ExactArray(tail.num[::-1].cumsum()[::-1], tail.den)
    mags = abs(suffix)
    k = mags.argmax()
    worst = mags[k]
    return SeriesTail(worst * A < 1, worst, A + 1 + k)
