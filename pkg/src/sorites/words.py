"""Continua of binary words, hypercubes, power sets and two Cayley-type graphs.

Binary words of length at most ``omega`` are stored in heap order: the
empty word is node 1 and the children of node ``k`` are ``2k`` (append 0)
and ``2k + 1`` (append 1).  A subtree then occupies one contiguous id range
per depth, which is what keeps tree balls down to ``O(omega)`` ranges.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .continuum import (
    BallIndex,
    MeshContinuum,
    MetricSource,
    WeightedGraph,
    register_source,
    source_from_json,
)
from .scale import ScaleContext, as_rational, format_rational

__all__ = [
    "TREE_KINDS",
    "TreeWordMetric",
    "HypercubeMetric",
    "PowerHausdorffMetric",
    "common_prefix",
    "word_distance",
    "power_hausdorff",
    "HypercubePacking",
    "gen_hypercube_packing",
    "gen_associahedron",
    "gen_free_group_ball",
    "word_continuum",
    "tree_graph",
]

TREE_KINDS = ("path", "hyperbolic", "cantor")
MAX_TREE_DEPTH = 22


def _check_word(w: str) -> str:
    if any(ch not in "01" for ch in w):
        raise ValueError(f"word {w!r} is not a 0/1 string")
    return w


def common_prefix(x: str, y: str) -> int:
    """Length of the longest common prefix."""
    m = 0
    for a, b in zip(x, y):
        if a != b:
            break
        m += 1
    return m


def _tree_scaled(kind: str, omega: int, weight: Fraction, dx, dy, m):
    """Scaled tree distance from word lengths and common-prefix length."""
    if kind == "path":
        return (dx + dy - 2 * m) * weight.numerator
    if kind == "hyperbolic":
        return dx + dy - 2 * m
    if kind == "cantor":
        # 2^(1-m) - 2^-|x| - 2^-|y| over 2^omega
        return (1 << (omega + 1 - m)) - (1 << (omega - dx)) - (1 << (omega - dy))
    raise ValueError(f"unknown tree kind {kind!r}")


def _tree_scale(kind: str, omega: int, weight: Fraction) -> int:
    if kind == "path":
        return weight.denominator
    if kind == "hyperbolic":
        return 2 * omega
    return 1 << omega


def word_distance(kind: str, x, y, omega: int, weight=1) -> Fraction:
    """Closed-form distance between two words (or two subsets for ``hypercube``)."""
    if kind == "hypercube":
        a, b = _subset_mask(x, omega), _subset_mask(y, omega)
        return Fraction(bin(a ^ b).count("1"), omega)
    x, y = _check_word(x), _check_word(y)
    if len(x) > omega or len(y) > omega:
        raise ValueError(f"word longer than omega={omega}")
    weight = as_rational(weight)
    m = common_prefix(x, y)
    return Fraction(_tree_scaled(kind, omega, weight, len(x), len(y), m), _tree_scale(kind, omega, weight))


def _subset_mask(s, omega: int) -> int:
    if isinstance(s, int):
        return s
    mask = 0
    for e in s:
        e = int(e)
        if not 1 <= e <= omega:
            raise ValueError(f"element {e} outside [1..{omega}]")
        mask |= 1 << (e - 1)
    return mask


def _mask_elements(mask: int) -> list[int]:
    out = []
    k = 1
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return out


def _bitlen(a: np.ndarray) -> np.ndarray:
    # exact for values below 2**53
    return np.frexp(a.astype(np.float64))[1].astype(np.int64)


@register_source("tree")
class TreeWordMetric(MetricSource):
    """Words of length ``omega`` (``carrier="leaves"``) or at most ``omega`` (``"all"``).

    ``kind`` picks the edge weighting: ``path`` counts edges (times
    ``weight``), ``hyperbolic`` is the path count over ``2 omega`` and
    ``cantor`` gives the edge into depth ``d`` weight ``2^-d``.
    """

    kind = "tree"

    def __init__(self, kind: str, omega: int, carrier: str = "leaves", weight=1):
        if kind not in TREE_KINDS:
            raise ValueError(f"unknown tree kind {kind!r}; expected one of {TREE_KINDS}")
        if carrier not in ("leaves", "all"):
            raise ValueError("carrier must be 'leaves' or 'all'")
        omega = int(omega)
        if not 1 <= omega <= MAX_TREE_DEPTH:
            raise ValueError(f"omega must be in [1..{MAX_TREE_DEPTH}] for an explicit carrier")
        self.word_kind = kind
        self.omega = omega
        self.carrier = carrier
        self.weight = as_rational(weight)
        if self.weight <= 0:
            raise ValueError("weight must be positive")
        self.scale = _tree_scale(kind, omega, self.weight)
        self._offset = (1 << omega) if carrier == "leaves" else 1
        self._depths = [omega] if carrier == "leaves" else list(range(omega + 1))

    def size(self) -> int:
        return (1 << self.omega) if self.carrier == "leaves" else (1 << (self.omega + 1)) - 1

    def node_id(self, i):
        return np.asarray(i, dtype=np.int64) + self._offset

    def word(self, i: int) -> str:
        return bin(int(i) + self._offset)[3:]

    def index_of(self, w: str) -> int:
        w = _check_word(w)
        if len(w) > self.omega or (self.carrier == "leaves" and len(w) != self.omega):
            raise ValueError(f"{w!r} is not in the carrier")
        return int("1" + w, 2) - self._offset

    def labels(self) -> list[str]:
        return [self.word(i) for i in range(self.size())]

    def depth(self, i) -> np.ndarray:
        return _bitlen(self.node_id(i)) - 1

    def scaled_pairs(self, i, j):
        a, b = self.node_id(i), self.node_id(j)
        da, db = _bitlen(a) - 1, _bitlen(b) - 1
        dm = np.minimum(da, db)
        ta, tb = a >> (da - dm), b >> (db - dm)
        x = ta ^ tb
        m = dm - np.where(x > 0, _bitlen(x), 0)
        return _tree_scaled(self.word_kind, self.omega, self.weight, da, db, m).astype(np.int64)

    def _mstar(self, d: int, t: int, radius: int) -> int | None:
        # distance decreases as the common prefix grows, so take the least m that fits
        for m in range(0, min(d, t) + 1):
            if _tree_scaled(self.word_kind, self.omega, self.weight, d, t, m) <= radius:
                return m
        return None

    def ball_ranges(self, radius: int) -> BallIndex:
        if radius < 0:
            return super().ball_ranges(radius)
        counts, los, his = [], [], []
        for d in self._depths:
            ids = np.arange(1 << d, 1 << (d + 1), dtype=np.int64)
            cols_lo, cols_hi = [], []
            for t in self._depths:
                m = self._mstar(d, t, radius)
                if m is None:
                    continue
                anc = ids >> (d - m)
                cols_lo.append((anc << (t - m)) - self._offset)
                cols_hi.append(((anc + 1) << (t - m)) - 1 - self._offset)
            counts.append(np.full(len(ids), len(cols_lo), dtype=np.int64))
            if cols_lo:
                los.append(np.stack(cols_lo, axis=1).ravel())
                his.append(np.stack(cols_hi, axis=1).ravel())
        rptr = np.zeros(self.size() + 1, dtype=np.int64)
        np.cumsum(np.concatenate(counts), out=rptr[1:])
        e = np.zeros(0, dtype=np.int64)
        return BallIndex(rptr, np.concatenate(los) if los else e, np.concatenate(his) if his else e)

    def min_positive_scaled(self) -> int | None:
        best = None
        for dx in self._depths:
            for dy in self._depths:
                for m in range(min(dx, dy) + 1):
                    if m == dx == dy:
                        continue
                    v = _tree_scaled(self.word_kind, self.omega, self.weight, dx, dy, m)
                    best = v if best is None else min(best, v)
        return best

    def to_json(self) -> dict:
        out = {"kind": self.kind, "word_kind": self.word_kind, "omega": self.omega, "carrier": self.carrier}
        if self.word_kind == "path":
            out["weight"] = format_rational(self.weight)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "TreeWordMetric":
        return cls(data["word_kind"], int(data["omega"]), data.get("carrier", "leaves"), data.get("weight", 1))


@register_source("hypercube")
class HypercubeMetric(MetricSource):
    """Subsets of ``[1..omega]`` under ``|A xor B| / omega``."""

    kind = "hypercube"

    def __init__(self, omega: int, subsets: Sequence | None = None):
        self.omega = int(omega)
        if self.omega < 1:
            raise ValueError("omega must be positive")
        if subsets is None:
            if self.omega > 12:
                raise ValueError("full hypercube carrier only for omega <= 12")
            subsets = list(range(1 << self.omega))
        self.masks = [_subset_mask(s, self.omega) for s in subsets]
        if len(set(self.masks)) != len(self.masks):
            raise ValueError("duplicate subsets in the carrier")
        self.scale = self.omega

    def size(self) -> int:
        return len(self.masks)

    def labels(self) -> list[str]:
        return ["{" + ",".join(map(str, _mask_elements(m))) + "}" for m in self.masks]

    def scaled_pairs(self, i, j):
        masks = self.masks
        return np.array([bin(masks[a] ^ masks[b]).count("1") for a, b in zip(np.ravel(i).tolist(), np.ravel(j).tolist())],
                        dtype=np.int64).reshape(np.shape(i))

    def to_json(self) -> dict:
        return {"kind": self.kind, "omega": self.omega, "subsets": [_mask_elements(m) for m in self.masks]}

    @classmethod
    def from_json(cls, data: dict) -> "HypercubeMetric":
        return cls(int(data["omega"]), data.get("subsets"))


def _hausdorff_scaled(table: np.ndarray, a: np.ndarray, b: np.ndarray) -> int:
    sub = table[np.ix_(a, b)]
    return int(max(sub.min(axis=1).max(), sub.min(axis=0).max()))


def power_hausdorff(C: MeshContinuum, a, b) -> Fraction:
    """Two-sided Hausdorff distance between nonempty subsets of a continuum."""
    a, b = C.subset(a), C.subset(b)
    if a.size == 0 or b.size == 0:
        raise ValueError("Hausdorff distance needs nonempty subsets")
    src = C.source
    ii, jj = np.meshgrid(a, b, indexing="ij")
    sub = src.scaled_pairs(ii.ravel(), jj.ravel()).reshape(len(a), len(b))
    val = max(sub.min(axis=1).max(), sub.min(axis=0).max())
    return Fraction(int(val), src.scale)


@register_source("power")
class PowerHausdorffMetric(MetricSource):
    """A family of nonempty subsets of a base space under the Hausdorff distance."""

    kind = "power"

    def __init__(self, base: MetricSource, subsets: Sequence[Iterable[int]]):
        self.base = base
        self.subsets = [np.array(sorted(set(int(v) for v in s)), dtype=np.int64) for s in subsets]
        if any(s.size == 0 for s in self.subsets):
            raise ValueError("subsets must be nonempty")
        keys = [tuple(s.tolist()) for s in self.subsets]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate subsets in the carrier")
        self.scale = base.scale
        self._base_table = base.scaled_table()

    def size(self) -> int:
        return len(self.subsets)

    def labels(self) -> list[str]:
        base = self.base.labels()
        return ["{" + ",".join(base[k] for k in s) + "}" for s in self.subsets]

    def scaled_pairs(self, i, j):
        t = self._base_table
        subs = self.subsets
        out = [_hausdorff_scaled(t, subs[a], subs[b]) for a, b in zip(np.ravel(i).tolist(), np.ravel(j).tolist())]
        return np.array(out, dtype=self._base_table.dtype).reshape(np.shape(i))

    def to_json(self) -> dict:
        return {"kind": self.kind, "base": self.base.to_json(), "subsets": [s.tolist() for s in self.subsets]}

    @classmethod
    def from_json(cls, data: dict) -> "PowerHausdorffMetric":
        return cls(source_from_json(data["base"]), data["subsets"])


@dataclass
class HypercubePacking:
    omega: int
    m: int
    masks: list[int]
    min_distance: Fraction
    intersection_sizes: list[int]
    pair_counts: list[int]

    @property
    def sets(self) -> list[list[int]]:
        return [_mask_elements(m) for m in self.masks]

    @property
    def separated(self) -> bool:
        return self.min_distance >= Fraction(1, 8)


def gen_hypercube_packing(omega: int) -> HypercubePacking:
    """The bit-position family ``A_i = {k < 2^(M+1) : bit i of k set}``, ``i = 0..M``."""
    omega = int(omega)
    if omega < 8:
        raise ValueError("hypercube packing needs omega >= 8")
    # 2^(M+1) < omega <= 2^(M+2)
    m = (omega - 1).bit_length() - 2
    masks = []
    for i in range(m + 1):
        mask = 0
        for k in range(1, 1 << (m + 1)):
            if k >> i & 1:
                mask |= 1 << (k - 1)
        masks.append(mask)
    sizes = [bin(x).count("1") for x in masks]
    pairs = [bin(masks[a] ^ masks[b]).count("1") for a in range(len(masks)) for b in range(a + 1, len(masks))]
    dmin = Fraction(min(pairs), omega) if pairs else Fraction(1)
    return HypercubePacking(omega, m, masks, dmin, sizes, pairs)


def _dyck_words(n: int) -> list[str]:
    """All balanced strings with ``n`` pairs, in lexicographic order with '(' < ')'."""
    out = []

    def rec(prefix: list, opened: int, closed: int) -> None:
        if opened == n and closed == n:
            out.append("".join(prefix))
            return
        if opened < n:
            prefix.append("(")
            rec(prefix, opened + 1, closed)
            prefix.pop()
        if closed < opened:
            prefix.append(")")
            rec(prefix, opened, closed + 1)
            prefix.pop()

    rec([], 0, 0)
    return out


def _right_rotations(s: str) -> list[str]:
    """Trees one right rotation away; node ``(L)R`` with ``L = (LL)LR`` becomes ``(LL)((LR)R)``."""
    match = [0] * len(s)
    stack = []
    for k, ch in enumerate(s):
        if ch == "(":
            stack.append(k)
        else:
            o = stack.pop()
            match[o] = k
    out = []
    for i in range(len(s) - 1):
        if s[i] == "(" and s[i + 1] == "(":
            j, k = match[i], match[i + 1]
            out.append(s[:i + 1] + s[i + 2:k + 1] + "(" + s[k + 1:j + 1] + s[j + 1:])
    return out


def gen_associahedron(n: int, diameter_limit: int = 5000) -> WeightedGraph:
    """Rotation graph on binary trees with ``n`` internal nodes, unit weights.

    Trees are balanced-parenthesis strings ``(L)R``.  ``graph.meta`` carries
    the node count, the left-comb to right-comb distance and, when the graph
    has at most ``diameter_limit`` nodes, the exact BFS diameter.
    """
    n = int(n)
    if not 3 <= n <= 12:
        raise ValueError("associahedron size must be in [3..12]")
    words = _dyck_words(n)
    index = {w: k for k, w in enumerate(words)}
    one = Fraction(1)
    edges = []
    nbrs: list[list[int]] = [[] for _ in words]
    for u, w in enumerate(words):
        for r in _right_rotations(w):
            v = index[r]
            edges.append((u, v, one))
            nbrs[u].append(v)
            nbrs[v].append(u)
    aptr = np.zeros(len(words) + 1, dtype=np.int64)
    np.cumsum([len(x) for x in nbrs], out=aptr[1:])
    adj = np.fromiter((v for x in nbrs for v in sorted(x)), dtype=np.int64, count=int(aptr[-1]))
    left_comb = "(" * n + ")" * n
    right_comb = "()" * n
    dist, _ = kernels.bfs(aptr, adj, adj, len(words), index[left_comb])
    degrees = np.diff(aptr)
    meta = {
        "family": "associahedron",
        "n": n,
        "node_count": len(words),
        "connected": bool((dist >= 0).all()),
        "degree_min": int(degrees.min()),
        "degree_max": int(degrees.max()),
        "comb_distance": int(dist[index[right_comb]]),
        "diameter_claimed": n,
    }
    if len(words) <= diameter_limit:
        ecc = 0
        for s in range(len(words)):
            d, _ = kernels.bfs(aptr, adj, adj, len(words), s)
            ecc = max(ecc, int(d.max()))
        meta["diameter"] = ecc
    g = WeightedGraph(words, edges, meta)
    return g


_INVERSE = {"a": "A", "A": "a", "b": "B", "B": "b"}


def gen_free_group_ball(n: int) -> WeightedGraph:
    """Reduced words over ``a, A=a^-1, b, B=b^-1`` of length at most ``n``; ``e`` is the identity."""
    n = int(n)
    if not 1 <= n <= 8:
        raise ValueError("ball radius must be in [1..8]")
    words = [""]
    edges = []
    one = Fraction(1)
    frontier = [0]
    for _ in range(n):
        nxt = []
        for u in frontier:
            w = words[u]
            for g in "aAbB":
                if w and _INVERSE[g] == w[-1]:
                    continue
                words.append(w + g)
                edges.append((u, len(words) - 1, one))
                nxt.append(len(words) - 1)
        frontier = nxt
    labels = [w or "e" for w in words]
    return WeightedGraph(labels, edges, {"family": "free_group_ball", "radius": n, "node_count": len(words)})


def tree_graph(omega: int, kind: str = "path", weight=1) -> WeightedGraph:
    """The binary tree of words up to ``omega`` as a weighted graph (heap order)."""
    weight = as_rational(weight)
    size = (1 << (omega + 1)) - 1
    labels = [bin(k)[3:] for k in range(1, size + 1)]
    edges = []
    for k in range(2, size + 1):
        d = k.bit_length() - 1
        if kind == "path":
            w = weight
        elif kind == "hyperbolic":
            w = Fraction(1, 2 * omega)
        elif kind == "cantor":
            w = Fraction(1, 1 << d)
        else:
            raise ValueError(f"unknown tree kind {kind!r}")
        edges.append((k // 2 - 1, k - 1, w))
    return WeightedGraph(labels, edges)


def word_continuum(kind: str, omega: int, ctx: ScaleContext, carrier: str = "leaves", weight=1) -> MeshContinuum:
    if kind == "hypercube":
        return MeshContinuum(HypercubeMetric(omega), ctx, f"hypercube-{omega}")
    return MeshContinuum(TreeWordMetric(kind, omega, carrier, weight), ctx, f"{kind}-{omega}-{carrier}")
