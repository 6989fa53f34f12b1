"""Covering, packing, compactness, connectedness and accumulation at a scale.

Minimal covers and packings are NP-hard, so both are greedy with lowest
index tie-breaking.  A greedy cover is an upper bound and a greedy packing
a lower bound; verdicts use each only in the direction it certifies.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from . import kernels
from .continuum import BallIndex, CarrierMap, MeshContinuum, _Oscillation, continuity_report
from .scale import as_rational, format_rational

__all__ = [
    "CoverResult",
    "PackResult",
    "covering_number",
    "packing_number",
    "TopologyProfile",
    "compactness_profile",
    "Components",
    "connected_components",
    "SoritesPath",
    "sorites_path",
    "AccumulationReport",
    "accumulation_report",
    "EquicontinuityError",
    "AscoliReport",
    "ascoli_demo",
]


def _range_sums(index: BallIndex, weights: np.ndarray, rows: np.ndarray | None = None) -> np.ndarray:
    """Sum of ``weights`` over each selected ball."""
    csum = np.concatenate([[0], np.cumsum(weights, dtype=np.int64)])
    if rows is None:
        rows = np.arange(index.n, dtype=np.int64)
    owner, lo, hi = index.gather(rows)
    per = csum[hi + 1] - csum[lo]
    out = np.zeros(len(rows), dtype=np.int64)
    if len(owner):
        pos = np.searchsorted(rows, owner) if np.all(np.diff(rows) > 0) else None
        if pos is None:
            lookup = {int(r): k for k, r in enumerate(rows)}
            pos = np.array([lookup[int(r)] for r in owner], dtype=np.int64)
        np.add.at(out, pos, per)
    return out


@dataclass
class CoverResult:
    radius: Fraction
    count: int
    centers: np.ndarray
    complete: bool

    def labels(self, C: MeshContinuum) -> list[str]:
        lab = C.labels()
        return [lab[i] for i in self.centers.tolist()]


@dataclass
class PackResult:
    radius: Fraction
    count: int
    witness: np.ndarray
    complete: bool

    def labels(self, C: MeshContinuum) -> list[str]:
        lab = C.labels()
        return [lab[i] for i in self.witness.tolist()]


def covering_number(C: MeshContinuum, delta, limit: int | None = None) -> CoverResult:
    """Greedy cover by closed ``delta``-balls; ``complete`` is False if ``limit`` cut it short."""
    delta = as_rational(delta)
    if delta <= 0:
        raise ValueError("radius must be positive")
    idx = C.balls(delta, closed=True)
    centers = kernels.greedy_cover(idx.rptr, idx.rlo, idx.rhi, C.n, -1 if limit is None else int(limit))
    covered = idx.union_mask(centers) if len(centers) else np.zeros(C.n, dtype=bool)
    complete = bool(covered.all())
    if limit is None and not complete:
        raise AssertionError("greedy cover left points uncovered")
    return CoverResult(delta, len(centers), centers, complete)


def packing_number(C: MeshContinuum, delta, limit: int | None = None) -> PackResult:
    """Greedy ``delta``-separated set (pairwise distance at least ``delta``), scanning by index.

    ``complete`` is False when the scan stopped at ``limit`` kept points.
    """
    delta = as_rational(delta)
    if delta <= 0:
        raise ValueError("radius must be positive")
    idx = C.balls(delta, closed=False)
    kept = kernels.greedy_pack(idx.rptr, idx.rlo, idx.rhi, C.n, -1 if limit is None else int(limit))
    # every kept point sees exactly one kept point (itself) strictly within delta
    ind = np.zeros(C.n, dtype=np.int64)
    ind[kept] = 1
    if len(kept) and not np.all(_range_sums(idx, ind, kept) == 1):
        raise AssertionError("packing witness is not separated")
    complete = limit is None or len(kept) < int(limit)
    return PackResult(delta, len(kept), kept, complete)


@dataclass
class TopologyProfile:
    ladder: list[Fraction]
    covering_counts: list[int]
    packing_counts: list[int]
    covering_at_threshold: int
    packing_at_threshold: int
    covering_complete: bool
    packing_complete: bool
    budget: int
    compact_verdict: bool
    covers: list[CoverResult] = field(default_factory=list, repr=False)
    packings: list[PackResult] = field(default_factory=list, repr=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["radius", "covering", "packing"])
        for r, c, p in zip(self.ladder, self.covering_counts, self.packing_counts):
            w.writerow([format_rational(r), c, p])
        return buf.getvalue()

    def to_json(self, C: MeshContinuum | None = None) -> dict:
        out = {
            "ladder": [format_rational(r) for r in self.ladder],
            "covering": self.covering_counts,
            "packing": self.packing_counts,
            "covering_at_threshold": self.covering_at_threshold,
            "packing_at_threshold": self.packing_at_threshold,
            "covering_complete": self.covering_complete,
            "packing_complete": self.packing_complete,
            "budget": self.budget,
            "compact": self.compact_verdict,
        }
        if C is not None:
            out["witnesses"] = [
                {"radius": format_rational(c.radius), "centers": c.labels(C), "separated": p.labels(C)}
                for c, p in zip(self.covers, self.packings)
            ]
        return out


def compactness_profile(C: MeshContinuum, ladder: Sequence = ()) -> TopologyProfile:
    """Covering and packing counts along a radius ladder plus the budgeted verdict.

    Compact means both the greedy cover and the greedy packing at ``1/A``
    stay within the compact budget.  Both scans stop one past the budget,
    which is enough to decide the verdict.
    """
    radii = [as_rational(r) for r in ladder]
    if any(r <= 0 for r in radii):
        raise ValueError("ladder radii must be positive")
    covers = [covering_number(C, r) for r in radii]
    packs = [packing_number(C, r) for r in radii]
    B = C.ctx.compact_budget
    thr = C.ctx.threshold
    cov = covering_number(C, thr, limit=B + 1)
    pack = packing_number(C, thr, limit=B + 1)
    verdict = cov.complete and cov.count <= B and pack.count <= B
    return TopologyProfile(
        radii,
        [c.count for c in covers],
        [p.count for p in packs],
        cov.count,
        pack.count,
        cov.complete,
        pack.complete,
        B,
        verdict,
        covers,
        packs,
    )


@dataclass
class Components:
    labels: np.ndarray
    parts: list[np.ndarray]

    @property
    def count(self) -> int:
        return len(self.parts)

    @property
    def connected(self) -> bool:
        return len(self.parts) == 1


def connected_components(C: MeshContinuum) -> Components:
    """Components of the indistinguishability graph, numbered by smallest member."""
    idx = C.indist_balls()
    lab = kernels.components(idx.rptr, idx.rlo, idx.rhi, C.n)
    order = np.argsort(lab, kind="stable")
    cuts = np.nonzero(np.diff(lab[order]))[0] + 1
    parts = np.split(order, cuts) if C.n else []
    return Components(lab, [p.astype(np.int64) for p in parts])


@dataclass
class SoritesPath:
    chain: list[int]
    adjacent_indistinguishable: bool
    endpoints_distinguishable: bool

    @property
    def hops(self) -> int:
        return len(self.chain) - 1

    @property
    def ok(self) -> bool:
        return self.adjacent_indistinguishable and self.endpoints_distinguishable


def sorites_path(C: MeshContinuum, x: int, y: int) -> SoritesPath | None:
    """Fewest-hop chain of indistinguishable steps from ``x`` to a distinguishable ``y``.

    Returns None when the endpoints are already indistinguishable or lie in
    different components.
    """
    if not (0 <= x < C.n and 0 <= y < C.n):
        raise ValueError("endpoint out of range")
    if C.indistinguishable(x, y):
        return None
    idx = C.indist_balls()
    dist, parent = kernels.bfs(idx.rptr, idx.rlo, idx.rhi, C.n, x)
    if dist[y] < 0:
        return None
    chain = [int(y)]
    while chain[-1] != x:
        chain.append(int(parent[chain[-1]]))
    chain.reverse()
    a = np.asarray(chain[:-1], dtype=np.int64)
    b = np.asarray(chain[1:], dtype=np.int64)
    steps = C.source.scaled_pairs(a, b)
    adjacent = bool(np.all(steps * C.ctx.horizon < C.source.scale))
    return SoritesPath(chain, adjacent, not C.indistinguishable(x, y))


@dataclass
class AccumulationReport:
    neighbor_counts: np.ndarray
    accumulation: np.ndarray
    isolated: np.ndarray
    perfect: bool

    def summary(self) -> dict:
        return {
            "points": int(len(self.neighbor_counts)),
            "accumulation": int(self.accumulation.sum()),
            "isolated": int(self.isolated.sum()),
            "perfect": self.perfect,
            "min_neighbors": int(self.neighbor_counts.min()) if len(self.neighbor_counts) else 0,
        }


def accumulation_report(C: MeshContinuum, subset=None) -> AccumulationReport:
    """Classify each carrier point against ``subset`` (default: the whole carrier).

    A point accumulates when more than ``A`` other members are
    indistinguishable from it and is isolated when none are.  The continuum
    is perfect when every point accumulates the rest of the carrier.
    """
    A = C.ctx.horizon
    idx = C.indist_balls()
    members = np.ones(C.n, dtype=np.int64)
    if subset is not None:
        members = np.zeros(C.n, dtype=np.int64)
        members[C.subset(subset)] = 1
    counts = _range_sums(idx, members) - members
    full = counts if subset is None else _range_sums(idx, np.ones(C.n, dtype=np.int64)) - 1
    return AccumulationReport(counts, counts > A, counts == 0, bool(np.all(full > A)))


class EquicontinuityError(ValueError):
    def __init__(self, member: int, k: int, pair: tuple[int, int]):
        self.member, self.k, self.pair = member, k, pair
        super().__init__(f"member {member} breaks the modulus at k={k}: points {pair}")


@dataclass
class AscoliReport:
    dense_domain: np.ndarray
    dense_codomain: np.ndarray
    tables: list[tuple[int, ...]]
    representatives: int
    bound: int
    max_error: Fraction
    within_threshold: bool
    kappa: dict[int, int]

    def to_json(self) -> dict:
        return {
            "dense_domain_size": int(len(self.dense_domain)),
            "dense_codomain_size": int(len(self.dense_codomain)),
            "members": len(self.tables),
            "representatives": self.representatives,
            "bound": self.bound,
            "max_error": format_rational(self.max_error),
            "within_threshold": self.within_threshold,
        }


def _modulus_witness(f: CarrierMap, R1: int, k: int) -> tuple[int, int]:
    i, j = f.domain.source.ball_ranges(R1).pairs()
    d = f.target_scaled_pairs(i, j)
    bad = np.nonzero(d * k >= f.target_scale())[0]
    w = int(bad[0])
    return int(i[w]), int(j[w])


def ascoli_demo(
    C1: MeshContinuum,
    C2: MeshContinuum,
    family: Sequence[CarrierMap],
    kappa: Mapping[int, int] | Callable[[int], int] | None = None,
    limit: int | None = None,
) -> AscoliReport:
    """Approximate an equicontinuous family by finitely many tables.

    Each member must satisfy ``d1 < 1/kappa(i)  =>  d2 < 1/i`` for
    ``i = 1..2A``.  Without a caller ``kappa`` the common modulus is
    measured, and it must stay at most ``A`` for ``i <= isqrt(A)`` (the
    test :func:`continuity_report` applies to a single map).  A dense ``A1`` of the domain uses open balls of radius
    ``1/kappa(2A)`` and a dense ``A2`` of the target closed balls of radius
    ``1/(2A)``; each member is projected to the table ``a -> nearest b to f(a)``
    and its extension stays within ``1/A`` of the member.
    """
    A = C1.ctx.horizon
    if C1.n * C2.n > 10**6:
        raise ValueError("carriers too large for the desk-scale demo")
    ks = range(1, 2 * A + 1)
    S1 = C1.source.scale
    oscs = [_Oscillation(f) for f in family]
    for f in family:
        if f.domain is not C1 or f.codomain is not C2:
            raise ValueError("family members must map C1 to C2")
    if kappa is None:
        # the family's common modulus; accessible precisions need an accessible modulus
        sub = max(1, math.isqrt(A))
        kap = {}
        for k in ks:
            best = 1
            for m, f in enumerate(family):
                val = continuity_report(f, [k]).modulus[k]
                if val is None:
                    R = f.domain.source.min_positive_scaled() or 0
                    raise EquicontinuityError(m, k, _modulus_witness(f, R, k))
                if k <= sub and val > A:
                    raise EquicontinuityError(m, k, _modulus_witness(f, -(-S1 // A) - 1, k))
                best = max(best, val)
            kap[k] = best
    elif callable(kappa):
        kap = {k: int(kappa(k)) for k in ks}
    else:
        kap = {int(k): int(v) for k, v in kappa.items()}
        missing = [k for k in ks if k not in kap]
        if missing:
            raise ValueError(f"kappa table lacks k={missing[0]}")
    for m, (f, osc) in enumerate(zip(family, oscs)):
        S2 = f.target_scale()
        for k in ks:
            R1 = -(-S1 // kap[k]) - 1
            if osc(R1) * k >= S2:
                raise EquicontinuityError(m, k, _modulus_witness(f, R1, k))
    # open balls of radius 1/kappa(2A) for the domain
    b1 = C1.balls(Fraction(1, kap[2 * A]), closed=False)
    a1 = kernels.greedy_cover(b1.rptr, b1.rlo, b1.rhi, C1.n, -1)
    c2 = covering_number(C2, Fraction(1, 2 * A))
    a2 = c2.centers
    if limit is not None and (len(a1) > limit or len(a2) > limit):
        raise ValueError(f"dense subsets of sizes {len(a1)} and {len(a2)} exceed the limit {limit}")
    # nearest center in A1 for every domain point (lowest index on ties)
    n1 = C1.n
    d_to_a1 = C1.source.scaled_pairs(np.repeat(np.arange(n1), len(a1)), np.tile(a1, n1)).reshape(n1, len(a1))
    assign = a1[np.argmin(d_to_a1, axis=1)]
    tables = []
    worst = 0
    for f in family:
        img_a1 = f.images[a1]
        d_to_a2 = C2.source.scaled_pairs(np.repeat(img_a1, len(a2)), np.tile(a2, len(a1))).reshape(len(a1), len(a2))
        phi = a2[np.argmin(d_to_a2, axis=1)]
        tables.append(tuple(int(v) for v in phi))
        lookup = dict(zip(a1.tolist(), phi.tolist()))
        ext = np.array([lookup[int(a)] for a in assign], dtype=np.int64)
        err = C2.source.scaled_pairs(f.images, ext)
        worst = max(worst, int(err.max()))
    max_error = Fraction(worst, C2.source.scale)
    return AscoliReport(
        a1,
        a2,
        tables,
        len(set(tables)),
        len(a2) ** len(a1),
        max_error,
        max_error < C1.ctx.threshold,
        kap,
    )
