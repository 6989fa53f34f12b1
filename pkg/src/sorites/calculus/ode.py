"""Forward Euler on interval meshes and an exact Gronwall-type stability check."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..exact import ExactArray
from ..scale import as_rational, format_rational
from .grid import GridFn, _grid

__all__ = ["Affine", "OdeBoundError", "euler_ode", "GronwallReport", "gronwall_check"]


@dataclass(frozen=True)
class Affine:
    """Right-hand side ``slope * y + offset``; integrated on an integer lattice."""

    slope: Fraction = Fraction(1)
    offset: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "slope", as_rational(self.slope))
        object.__setattr__(self, "offset", as_rational(self.offset))

    def __call__(self, x, y) -> Fraction:
        return self.slope * y + self.offset


class OdeBoundError(ValueError):
    """The solution or the right-hand side left the box the bound ``K`` allows."""

    def __init__(self, message: str, x: Fraction, value: Fraction | None = None):
        super().__init__(message)
        self.x = x
        self.value = value


def euler_ode(rhs, a, eps, K=None, L=None, b=1) -> GridFn:
    """``phi(x + eps) = phi(x) + rhs(x, phi(x)) eps`` on ``[0, b]_eps`` from ``phi(0) = a``.

    With ``K`` set, every step checks ``|phi| < 2K`` and ``|rhs| < K`` and
    raises :class:`OdeBoundError` at the first offending mesh point.  ``L`` is
    the caller's Lipschitz constant; it is only validated here and is used by
    :func:`gronwall_check`.
    """
    a, eps = as_rational(a), as_rational(eps)
    K = None if K is None else as_rational(K)
    if L is not None and as_rational(L) < 0:
        raise ValueError("Lipschitz constant must be nonnegative")
    if K is not None and abs(a) > K:
        raise OdeBoundError("|a| exceeds K", Fraction(0), a)
    dom = _grid(0, b, eps)
    if isinstance(rhs, Affine):
        return GridFn(dom, _euler_affine(rhs, a, eps, dom.steps, K))
    vals = [a]
    y = a
    for k in range(dom.steps):
        x = dom.point(k)
        s = as_rational(rhs(x, y))
        if K is not None and abs(s) >= K:
            raise OdeBoundError(f"|rhs| >= K at x={format_rational(x)}", x, s)
        y = y + s * eps
        if K is not None and abs(y) >= 2 * K:
            nx = dom.point(k + 1)
            raise OdeBoundError(f"|phi| >= 2K at x={format_rational(nx)}", nx, y)
        vals.append(y)
    return GridFn(dom, vals)


def _euler_affine(rhs: Affine, a: Fraction, eps: Fraction, steps: int, K) -> ExactArray:
    # y_{k+1} = (u/t) y_k + v/w; every y_k is an integer over D = d0 (t w)^steps
    grow = 1 + rhs.slope * eps
    shift = rhs.offset * eps
    u, t = grow.numerator, grow.denominator
    v, w = shift.numerator, shift.denominator
    d0 = a.denominator
    tK = t**steps
    D = d0 * tK * w**steps
    add = v * d0 * tK * w ** (steps - 1) if steps else 0
    N = a.numerator * (D // d0)
    out = np.empty(steps + 1, dtype=object)
    out[0] = N
    if K is not None:
        kn, kd = K.numerator, K.denominator
        pn, pd = rhs.slope.numerator, rhs.slope.denominator
        qn, qd = rhs.offset.numerator, rhs.offset.denominator
        lim_phi = 2 * kn * D
        lim_rhs = kn * pd * qd * D
        qterm = qn * pd * D
    for k in range(steps):
        if K is not None and abs(pn * qd * N + qterm) * kd >= lim_rhs:
            x = k * eps
            raise OdeBoundError(f"|rhs| >= K at x={format_rational(x)}", x, rhs(x, Fraction(N, D)))
        N = u * N // t + add
        if K is not None and abs(N) * kd >= lim_phi:
            x = (k + 1) * eps
            raise OdeBoundError(f"|phi| >= 2K at x={format_rational(x)}", x, Fraction(N, D))
        out[k + 1] = N
    return ExactArray(out, D)


@dataclass
class GronwallReport:
    holds: bool
    max_ratio: Fraction | None
    worst_x: Fraction | None
    defect: Fraction
    first_violation: Fraction | None

    def to_json(self) -> dict:
        return {
            "holds": self.holds,
            "max_ratio": None if self.max_ratio is None else format_rational(self.max_ratio),
            "worst_x": None if self.worst_x is None else format_rational(self.worst_x),
            "defect": format_rational(self.defect),
            "first_violation": None if self.first_violation is None else format_rational(self.first_violation),
        }


def gronwall_check(phi1: GridFn, phi2: GridFn, L, defect=None) -> GronwallReport:
    """Exact test of ``|h(x)| <= |h(0)| r^k + (delta/L)(r^k - 1)`` at ``x = k eps``.

    ``h = phi1 - phi2``, ``r = 1 + L eps`` and ``delta`` is the measured defect
    ``max(0, max |dh| - L |h|)``.  Clearing denominators turns the bound into
    ``G_k <= G_0 r^k`` for integers ``G_k``; the right side is carried as an
    exact floor plus remainder so each step costs only small-by-large
    products.  The worst ratio ``|h| / bound`` is located in floating point
    and then evaluated exactly.

    Passing ``defect`` replaces the measured value with a claimed one, which
    turns the check into a test of that claim.
    """
    L = as_rational(L)
    if L <= 0:
        raise ValueError("Lipschitz constant must be positive")
    d1, d2 = phi1.domain, phi2.domain
    if (d1.a, d1.b, d1.eps) != (d2.a, d2.b, d2.eps):
        raise ValueError("both runs must share a domain")
    eps = d1.eps
    v1, v2 = phi1.values, phi2.values
    Dh = math.lcm(v1.den, v2.den)
    H = v1.num * (Dh // v1.den) - v2.num * (Dh // v2.den)
    absH = np.abs(H)
    en, ed = eps.numerator, eps.denominator
    Ln, Ld = L.numerator, L.denominator
    n = len(H)
    dH = np.abs(np.diff(H))
    if defect is None:
        M0 = 0
        if n > 1:
            M0 = max(0, int(np.max(dH * (ed * Ld) - absH[:-1] * (Ln * en))))
        defect = Fraction(M0, Dh * en * Ld)
        extra = 1
    else:
        defect = as_rational(defect)
        if defect < 0:
            raise ValueError("defect must be nonnegative")
        # clear the claimed defect's denominator too
        m = defect * Dh * en * Ld
        M0, extra = m.numerator, m.denominator
    rho = 1 + L * eps
    u, t = rho.numerator, rho.denominator
    scale = en * Ln * extra
    G0 = int(absH[0]) * scale + M0
    Y, R, tk = G0, 0, 1  # G0 u^k / t^k = Y + R / t^k
    holds, first_bad = True, None
    best, best_k = -math.inf, None
    for k in range(n):
        if k:
            q, r = divmod(Y * u, t)
            tk1 = tk * t
            R = r * tk + R * u
            while R >= tk1:
                R -= tk1
                q += 1
            Y, tk = q, tk1
        hk = int(absH[k]) * scale
        if hk + M0 > Y and holds:
            holds, first_bad = False, d1.point(k)
        if hk:
            room = Y - M0
            score = math.inf if room <= 0 else math.log(hk) - math.log(room)
            if score > best:
                best, best_k = score, k
    if best_k is None:
        return GronwallReport(holds, Fraction(0), None, defect, first_bad)
    k = best_k
    num = int(absH[k]) * scale * t**k
    den = G0 * u**k - M0 * t**k
    # a zero bound against nonzero h has no finite ratio
    ratio = Fraction(num, den) if den > 0 else None
    return GronwallReport(holds, ratio, d1.point(k), defect, first_bad)
