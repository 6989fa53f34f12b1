"""Rigid mesh continua: finite carriers with exact rational metrics.

Every metric source reports an integer ``scale`` S such that ``d(i, j) * S``
is an integer for all pairs.  Ball queries then reduce to integer
comparisons, and balls are stored as sorted index ranges so a grid with
a million points costs one range per point rather than a dense row.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels
from .exact import ExactArray
from .scale import ScaleContext, as_rational, format_rational

__all__ = [
    "BallIndex",
    "MetricSource",
    "ExplicitTable",
    "GridInterval",
    "Product",
    "WeightedGraph",
    "GraphMetric",
    "MeshContinuum",
    "DisconnectedGraphError",
    "NoAlmostInverse",
    "CarrierMap",
    "build_grid",
    "build_graph_metric",
    "merge_grids",
    "saturate",
    "is_dense",
    "function_sup_distance",
    "continuity_report",
    "morphism_check",
    "almost_inverse_search",
    "snap_map",
    "continuum_from_json",
]

TABLE_CUTOFF = 4096
_INT64_SAFE = 1 << 62


def _fits_int64(values) -> bool:
    return all(-_INT64_SAFE < int(v) < _INT64_SAFE for v in values)


@dataclass(frozen=True)
class BallIndex:
    """Balls as CSR-of-ranges: ball ``i`` is ``rlo[k]..rhi[k]`` for ``rptr[i] <= k < rptr[i+1]``."""

    rptr: np.ndarray
    rlo: np.ndarray
    rhi: np.ndarray

    @property
    def n(self) -> int:
        return len(self.rptr) - 1

    def ball(self, i: int) -> np.ndarray:
        a, b = self.rptr[i], self.rptr[i + 1]
        if a == b:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate([np.arange(lo, hi + 1) for lo, hi in zip(self.rlo[a:b], self.rhi[a:b])])

    def sizes(self) -> np.ndarray:
        per_range = self.rhi - self.rlo + 1
        csum = np.concatenate([[0], np.cumsum(per_range)])
        return csum[self.rptr[1:]] - csum[self.rptr[:-1]]

    def gather(self, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Ranges of the selected rows, with the row each range came from."""
        rows = np.asarray(rows, dtype=np.int64)
        starts = self.rptr[rows]
        counts = self.rptr[rows + 1] - starts
        total = int(counts.sum())
        if total == 0:
            e = np.zeros(0, dtype=np.int64)
            return e, e, e
        owner = np.repeat(np.arange(len(rows)), counts)
        offs = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        ks = starts[owner] + offs
        return rows[owner], self.rlo[ks], self.rhi[ks]

    def union_mask(self, rows: np.ndarray) -> np.ndarray:
        """Boolean mask of the union of the selected balls."""
        _, lo, hi = self.gather(rows)
        marks = np.zeros(self.n + 1, dtype=np.int64)
        np.add.at(marks, lo, 1)
        np.add.at(marks, hi + 1, -1)
        return np.cumsum(marks[:-1]) > 0

    def pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """Every ``(i, j)`` with ``j`` in ball ``i``; quadratic, small carriers only."""
        owner, lo, hi = self.gather(np.arange(self.n))
        lens = hi - lo + 1
        total = int(lens.sum())
        i = np.repeat(owner, lens)
        j = np.repeat(lo, lens) + (np.arange(total) - np.repeat(np.cumsum(lens) - lens, lens))
        return i, j


def mask_to_ranges(mask: np.ndarray) -> BallIndex:
    """Compress a boolean ``n x n`` ball matrix into sorted ranges."""
    mask = np.asarray(mask, dtype=bool)
    n = mask.shape[0]
    padded = np.zeros((n, mask.shape[1] + 2), dtype=np.int8)
    padded[:, 1:-1] = mask
    step = np.diff(padded, axis=1)
    srow, scol = np.nonzero(step == 1)
    _, ecol = np.nonzero(step == -1)
    rptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(srow, minlength=n), out=rptr[1:])
    return BallIndex(rptr, scol.astype(np.int64), (ecol - 1).astype(np.int64))


def lists_to_ranges(rows: Sequence[Sequence[tuple[int, int]]]) -> BallIndex:
    rptr = np.zeros(len(rows) + 1, dtype=np.int64)
    np.cumsum([len(r) for r in rows], out=rptr[1:])
    lo = np.fromiter((a for r in rows for a, _ in r), dtype=np.int64, count=int(rptr[-1]))
    hi = np.fromiter((b for r in rows for _, b in r), dtype=np.int64, count=int(rptr[-1]))
    return BallIndex(rptr, lo, hi)


def sorted_to_ranges(idx: np.ndarray) -> list[tuple[int, int]]:
    if len(idx) == 0:
        return []
    breaks = np.nonzero(np.diff(idx) != 1)[0]
    starts = np.concatenate([[0], breaks + 1])
    ends = np.concatenate([breaks, [len(idx) - 1]])
    return list(zip(idx[starts].tolist(), idx[ends].tolist()))


class MetricSource:
    """Base class; subclasses define ``size``, ``scale`` and ``scaled_pairs``."""

    kind = "abstract"
    scale: int = 1

    def size(self) -> int:
        raise NotImplementedError

    def labels(self) -> list[str]:
        return [str(i) for i in range(self.size())]

    def scaled_pairs(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        """Integer ``S * d(i[k], j[k])`` for paired index arrays."""
        raise NotImplementedError

    def scaled(self, i: int, j: int) -> int:
        return int(self.scaled_pairs(np.array([i]), np.array([j]))[0])

    def distance(self, i: int, j: int) -> Fraction:
        return Fraction(self.scaled(i, j), self.scale)

    def scaled_row(self, i: int) -> np.ndarray:
        n = self.size()
        return self.scaled_pairs(np.full(n, i, dtype=np.int64), np.arange(n, dtype=np.int64))

    def scaled_table(self) -> np.ndarray:
        n = self.size()
        if n > TABLE_CUTOFF:
            raise ValueError(f"carrier of {n} points exceeds the table cutoff {TABLE_CUTOFF}")
        ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        return self.scaled_pairs(ii.ravel(), jj.ravel()).reshape(n, n)

    def ball_ranges(self, radius: int) -> BallIndex:
        """Ball index for ``S * d <= radius``."""
        if radius < 0:
            n = self.size()
            e = np.zeros(0, dtype=np.int64)
            return BallIndex(np.zeros(n + 1, dtype=np.int64), e, e)
        return mask_to_ranges(self.scaled_table() <= radius)

    def min_positive_scaled(self) -> int | None:
        t = self.scaled_table()
        pos = t[t > 0]
        return int(pos.min()) if pos.size else None

    def to_json(self) -> dict:
        raise NotImplementedError


_SOURCE_KINDS: dict[str, Callable[[dict], MetricSource]] = {}


def register_source(kind: str):
    def deco(cls):
        _SOURCE_KINDS[kind] = cls.from_json
        return cls

    return deco


def source_from_json(data: dict) -> MetricSource:
    from . import words  # noqa: F401  registers the word sources

    kind = data.get("kind")
    if kind not in _SOURCE_KINDS:
        raise ValueError(f"unknown metric kind {kind!r}")
    return _SOURCE_KINDS[kind](data)


def _check_metric_table(t: np.ndarray, seed: int = 0, exhaustive_limit: int = 512, samples: int = 20000) -> None:
    n = t.shape[0]
    if t.shape != (n, n):
        raise ValueError("distance table must be square")
    if not np.array_equal(t, t.T):
        i, j = np.argwhere(t != t.T)[0]
        raise ValueError(f"distance table is not symmetric at ({i}, {j})")
    if any(t[i, i] != 0 for i in range(n)):
        raise ValueError("distance table has a nonzero diagonal")
    off = ~np.eye(n, dtype=bool)
    if np.any(t[off] <= 0):
        i, j = np.argwhere((t <= 0) & off)[0]
        raise ValueError(f"distinct points {i} and {j} at distance <= 0")
    if n <= exhaustive_limit:
        for k in range(n):
            bad = t > t[:, k][:, None] + t[k, :][None, :]
            if np.any(bad):
                i, j = np.argwhere(bad)[0]
                raise ValueError(f"triangle inequality fails for ({i}, {k}, {j})")
    else:
        rng = np.random.default_rng(seed)
        i, j, k = rng.integers(0, n, size=(3, samples))
        bad = t[i, j] > t[i, k] + t[k, j]
        if np.any(bad):
            w = int(np.argmax(bad))
            raise ValueError(f"triangle inequality fails for ({i[w]}, {k[w]}, {j[w]})")


@register_source("table")
class ExplicitTable(MetricSource):
    """An explicit symmetric matrix of rationals, validated on construction."""

    kind = "table"

    def __init__(self, table: Sequence[Sequence], labels: Sequence[str] | None = None, check: bool = True):
        rows = [[as_rational(v) for v in row] for row in table]
        n = len(rows)
        den = 1
        for row in rows:
            if len(row) != n:
                raise ValueError("distance table must be square")
            for v in row:
                den = math.lcm(den, v.denominator)
        self.scale = den
        flat = [v.numerator * (den // v.denominator) for row in rows for v in row]
        dtype = np.int64 if _fits_int64(flat) else object
        self._t = np.array(flat, dtype=dtype).reshape(n, n) if n else np.zeros((0, 0), dtype=np.int64)
        self._labels = list(labels) if labels is not None else [str(i) for i in range(n)]
        if len(self._labels) != n:
            raise ValueError("label count does not match the table")
        if check:
            _check_metric_table(self._t)

    @classmethod
    def from_scaled(cls, scaled: np.ndarray, scale: int, labels=None, check: bool = True) -> "ExplicitTable":
        obj = cls.__new__(cls)
        obj.scale = int(scale)
        obj._t = np.asarray(scaled)
        n = obj._t.shape[0]
        obj._labels = list(labels) if labels is not None else [str(i) for i in range(n)]
        if check:
            _check_metric_table(obj._t)
        return obj

    def size(self) -> int:
        return self._t.shape[0]

    def labels(self) -> list[str]:
        return list(self._labels)

    def scaled_pairs(self, i, j):
        return self._t[np.asarray(i), np.asarray(j)]

    def scaled_table(self) -> np.ndarray:
        return self._t

    def rational_table(self) -> list[list[Fraction]]:
        return [[Fraction(int(v), self.scale) for v in row] for row in self._t]

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "table": [[format_rational(v) for v in row] for row in self.rational_table()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "ExplicitTable":
        return cls(data["table"], data.get("labels"))


@register_source("grid")
class GridInterval(MetricSource):
    """The interval mesh ``{a, a + eps, ..., b}`` with ``|x - y|``."""

    kind = "grid"

    def __init__(self, a, b, eps, allow_point: bool = False):
        a, b, eps = as_rational(a), as_rational(b), as_rational(eps)
        if eps <= 0:
            raise ValueError("mesh must be positive")
        if not (a < b or (allow_point and a == b)):
            raise ValueError("grid needs a < b")
        steps = (b - a) / eps
        if steps.denominator != 1:
            raise ValueError(f"(b - a)/eps = {format_rational(steps)} is not an integer")
        self.a, self.b, self.eps = a, b, eps
        self.steps = int(steps)
        self.scale = eps.denominator
        self.step = eps.numerator

    def size(self) -> int:
        return self.steps + 1

    def point(self, i: int) -> Fraction:
        return self.a + i * self.eps

    def index_of(self, x) -> int:
        k = (as_rational(x) - self.a) / self.eps
        if k.denominator != 1 or not 0 <= k <= self.steps:
            raise ValueError(f"{format_rational(as_rational(x))} is not a point of the grid")
        return int(k)

    def points(self) -> ExactArray:
        """All grid points as one exact vector."""
        d = self.eps.denominator
        base = self.a * d
        if base.denominator == 1:
            num = int(base) + np.arange(self.size(), dtype=object) * self.step
            return ExactArray(num, d)
        den = math.lcm(d, self.a.denominator)
        num = self.a.numerator * (den // self.a.denominator) + np.arange(self.size(), dtype=object) * (
            self.step * (den // d)
        )
        return ExactArray(num, den)

    def labels(self) -> list[str]:
        return [format_rational(self.point(i)) for i in range(self.size())]

    def scaled_pairs(self, i, j):
        return np.abs(np.asarray(i, dtype=np.int64) - np.asarray(j, dtype=np.int64)) * self.step

    def window(self, radius: int) -> int:
        """Largest index offset ``w`` with ``w * step <= radius``."""
        return radius // self.step if radius >= 0 else -1

    def ball_ranges(self, radius: int) -> BallIndex:
        n = self.size()
        w = self.window(radius)
        if w < 0:
            return super().ball_ranges(radius)
        idx = np.arange(n, dtype=np.int64)
        return BallIndex(
            np.arange(n + 1, dtype=np.int64),
            np.maximum(idx - w, 0),
            np.minimum(idx + w, n - 1),
        )

    def min_positive_scaled(self) -> int | None:
        return self.step if self.size() > 1 else None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "a": format_rational(self.a),
            "b": format_rational(self.b),
            "eps": format_rational(self.eps),
        }

    @classmethod
    def from_json(cls, data: dict) -> "GridInterval":
        return cls(data["a"], data["b"], data["eps"])


@register_source("product")
class Product(MetricSource):
    """Cartesian product under the max metric; points indexed row-major."""

    kind = "product"

    def __init__(self, factors: Sequence[MetricSource]):
        if not factors:
            raise ValueError("product needs at least one factor")
        self.factors = list(factors)
        self.shape = tuple(f.size() for f in self.factors)
        scale = 1
        for f in self.factors:
            scale = math.lcm(scale, f.scale)
        self.scale = scale
        self._mult = [scale // f.scale for f in self.factors]

    def size(self) -> int:
        return int(np.prod(self.shape))

    def coords(self, i) -> tuple[np.ndarray, ...]:
        return np.unravel_index(np.asarray(i, dtype=np.int64), self.shape)

    def labels(self) -> list[str]:
        parts = [f.labels() for f in self.factors]
        out = []
        for i in range(self.size()):
            c = self.coords(i)
            out.append("(" + ",".join(parts[k][int(c[k])] for k in range(len(parts))) + ")")
        return out

    def scaled_pairs(self, i, j):
        ci, cj = self.coords(i), self.coords(j)
        out = None
        for f, m, a, b in zip(self.factors, self._mult, ci, cj):
            d = f.scaled_pairs(a, b) * m
            out = d if out is None else np.maximum(out, d)
        return out

    def ball_ranges(self, radius: int) -> BallIndex:
        if radius < 0:
            return super().ball_ranges(radius)
        # each coordinate must lie in its own factor ball
        subs = [f.ball_ranges(radius // m) for f, m in zip(self.factors, self._mult)]
        strides = [int(np.prod(self.shape[k + 1:])) for k in range(len(self.shape))]
        rows = []
        for i in range(self.size()):
            c = [int(v) for v in self.coords(i)]
            bases = [0]
            for k in range(len(subs) - 1):
                members = subs[k].ball(c[k])
                bases = [b + int(m) * strides[k] for b in bases for m in members]
            last = subs[-1]
            a, b = last.rptr[c[-1]], last.rptr[c[-1] + 1]
            rows.append([(base + int(lo), base + int(hi)) for base in bases for lo, hi in zip(last.rlo[a:b], last.rhi[a:b])])
        return lists_to_ranges(rows)

    def min_positive_scaled(self) -> int | None:
        vals = [f.min_positive_scaled() for f in self.factors]
        vals = [v * m for v, m in zip(vals, self._mult) if v is not None]
        return min(vals) if vals else None

    def to_json(self) -> dict:
        return {"kind": self.kind, "factors": [f.to_json() for f in self.factors]}

    @classmethod
    def from_json(cls, data: dict) -> "Product":
        return cls([source_from_json(d) for d in data["factors"]])


class DisconnectedGraphError(ValueError):
    def __init__(self, components: list[list[int]]):
        self.components = components
        super().__init__(f"graph is disconnected: {len(components)} components, sizes {[len(c) for c in components]}")


@dataclass
class WeightedGraph:
    """Vertex labels plus an undirected edge list with positive rational weights."""

    labels: list[str]
    edges: list[tuple[int, int, Fraction]]
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = len(self.labels)
        clean = []
        for u, v, w in self.edges:
            w = as_rational(w)
            if w <= 0:
                raise ValueError(f"edge ({u}, {v}) has non-positive weight")
            if not (0 <= u < n and 0 <= v < n) or u == v:
                raise ValueError(f"bad edge ({u}, {v})")
            clean.append((int(u), int(v), w))
        self.edges = clean

    @property
    def n(self) -> int:
        return len(self.labels)

    def csr(self) -> tuple[np.ndarray, np.ndarray, list[int], int]:
        """Symmetric CSR adjacency with weights scaled to integers."""
        scale = 1
        for _, _, w in self.edges:
            scale = math.lcm(scale, w.denominator)
        n = self.n
        nbrs: list[dict[int, int]] = [dict() for _ in range(n)]
        for u, v, w in self.edges:
            s = w.numerator * (scale // w.denominator)
            # keep the lighter of parallel edges
            if v not in nbrs[u] or s < nbrs[u][v]:
                nbrs[u][v] = s
                nbrs[v][u] = s
        aptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum([len(d) for d in nbrs], out=aptr[1:])
        adj = np.fromiter((v for d in nbrs for v in sorted(d)), dtype=np.int64, count=int(aptr[-1]))
        wts = [d[v] for d in nbrs for v in sorted(d)]
        return aptr, adj, wts, scale

    def unit_ranges(self) -> BallIndex:
        """Neighbor lists as one-point ranges (for hop-count searches)."""
        aptr, adj, _, _ = self.csr()
        return BallIndex(aptr, adj, adj.copy())

    def components(self) -> list[list[int]]:
        idx = self.unit_ranges()
        labels = kernels.components(idx.rptr, idx.rlo, idx.rhi, self.n)
        groups: dict[int, list[int]] = {}
        for i, c in enumerate(labels.tolist()):
            groups.setdefault(c, []).append(i)
        return [groups[k] for k in sorted(groups)]

    def to_dot(self, name: str = "G") -> str:
        lines = [f"graph {json.dumps(name)} {{"]
        for i, lab in enumerate(self.labels):
            lines.append(f"  {i} [label={json.dumps(lab)}];")
        for u, v, w in self.edges:
            lines.append(f"  {u} -- {v} [weight={json.dumps(format_rational(w))}];")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        out = {
            "labels": list(self.labels),
            "edges": [[u, v, format_rational(w)] for u, v, w in self.edges],
        }
        out.update(self.meta)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "WeightedGraph":
        return cls(list(data["labels"]), [(int(u), int(v), as_rational(w)) for u, v, w in data["edges"]])


@register_source("graph")
class GraphMetric(MetricSource):
    """Shortest-path metric of a connected weighted graph.

    Small graphs get a full distance table; large ones answer ball
    queries with a radius-bounded search from every vertex.
    """

    kind = "graph"

    def __init__(self, graph: WeightedGraph):
        self.graph = graph
        comps = graph.components()
        if len(comps) > 1:
            raise DisconnectedGraphError(comps)
        self._aptr, self._adj, self._wts, self.scale = graph.csr()
        self._int64 = sum(self._wts) < _INT64_SAFE
        self._table = None

    def size(self) -> int:
        return self.graph.n

    def labels(self) -> list[str]:
        return list(self.graph.labels)

    def _search(self, source: int, radius: int):
        if self._int64:
            return kernels.bounded_dijkstra(self._aptr, self._adj, np.asarray(self._wts, dtype=np.int64),
                                            self.size(), source, radius)
        from ._kernels_py import bounded_dijkstra

        return bounded_dijkstra(self._aptr, self._adj, self._wts, self.size(), source, radius)

    def scaled_table(self) -> np.ndarray:
        if self._table is None:
            n = self.size()
            if n > TABLE_CUTOFF:
                raise ValueError(f"carrier of {n} points exceeds the table cutoff {TABLE_CUTOFF}")
            t = np.zeros((n, n), dtype=np.int64 if self._int64 else object)
            for s in range(n):
                verts, dists = self._search(s, -1)
                t[s, verts] = dists
            self._table = t
        return self._table

    def scaled_pairs(self, i, j):
        i, j = np.asarray(i), np.asarray(j)
        if self.size() <= TABLE_CUTOFF:
            return self.scaled_table()[i, j]
        out = []
        for a, b in zip(i.tolist(), j.tolist()):
            verts, dists = self._search(a, -1)
            out.append(dists[np.searchsorted(verts, b)])
        return np.asarray(out)

    def ball_ranges(self, radius: int) -> BallIndex:
        if self.size() <= TABLE_CUTOFF or radius < 0:
            return super().ball_ranges(radius)
        rows = [sorted_to_ranges(self._search(s, radius)[0]) for s in range(self.size())]
        return lists_to_ranges(rows)

    def min_positive_scaled(self) -> int | None:
        return min(self._wts) if self._wts else None

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        out.update(self.graph.to_json())
        return out

    @classmethod
    def from_json(cls, data: dict) -> "GraphMetric":
        return cls(WeightedGraph.from_json(data))


class MeshContinuum:
    """Finite carrier, exact metric source and scale context."""

    def __init__(self, source: MetricSource, scale: ScaleContext, name: str = "continuum"):
        self.source = source
        self.ctx = scale
        self.name = name
        self._balls: dict[int, BallIndex] = {}

    def __len__(self) -> int:
        return self.source.size()

    @property
    def n(self) -> int:
        return self.source.size()

    def labels(self) -> list[str]:
        return self.source.labels()

    def distance(self, i: int, j: int) -> Fraction:
        return self.source.distance(i, j)

    def indistinguishable(self, i: int, j: int) -> bool:
        return self.source.scaled(i, j) * self.ctx.horizon < self.source.scale

    def scaled_radius(self, r, closed: bool = True) -> int:
        """Integer bound R so that ``d <= r`` (or ``d < r``) reads ``S * d <= R``."""
        r = as_rational(r) * self.source.scale
        if closed:
            return math.floor(r)
        return math.ceil(r) - 1

    def balls(self, r, closed: bool = True) -> BallIndex:
        R = self.scaled_radius(r, closed)
        if R not in self._balls:
            self._balls[R] = self.source.ball_ranges(R)
        return self._balls[R]

    def indist_balls(self) -> BallIndex:
        """Open balls of radius ``1/A``: the indistinguishability relation."""
        return self.balls(self.ctx.threshold, closed=False)

    def subset(self, indices: Iterable[int]) -> np.ndarray:
        idx = np.asarray(list(indices) if not isinstance(indices, np.ndarray) else indices, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            raise ValueError("subset index out of range")
        if len(np.unique(idx)) != len(idx):
            raise ValueError("subset has duplicate indices")
        return np.sort(idx)

    def to_json(self, include_table: bool = False) -> dict:
        out = {
            "name": self.name,
            "scale": self.ctx.to_json(),
            "carrier": self.labels(),
            "metric": self.source.to_json(),
        }
        if include_table:
            t = self.source.scaled_table()
            S = self.source.scale
            out["table"] = [[format_rational(Fraction(int(v), S)) for v in row] for row in t]
        return out

    def to_dot(self) -> str:
        if isinstance(self.source, GraphMetric):
            return self.source.graph.to_dot(self.name)
        raise ValueError("DOT export needs a graph metric")


def continuum_from_json(data: dict) -> MeshContinuum:
    src = source_from_json(data["metric"])
    return MeshContinuum(src, ScaleContext.from_json(data["scale"]), data.get("name", "continuum"))


def build_grid(a, b, eps, ctx: ScaleContext, name: str = "grid") -> MeshContinuum:
    return MeshContinuum(GridInterval(a, b, eps), ctx, name)


def build_graph_metric(g: WeightedGraph, ctx: ScaleContext, name: str = "graph") -> MeshContinuum:
    return MeshContinuum(GraphMetric(g), ctx, name)


def merge_grids(grids: Sequence[GridInterval], ctx: ScaleContext, name: str = "merged") -> MeshContinuum:
    """Disjoint union of grids as subsets of the line, as an explicit table."""
    pts = []
    for g in grids:
        pts.extend(g.point(i) for i in range(g.size()))
    vals = ExactArray.from_rationals(pts)
    if len(set(pts)) != len(pts):
        raise ValueError("grids overlap")
    num = vals.num
    t = np.abs(num[:, None] - num[None, :])
    if _fits_int64(num.tolist()):
        t = t.astype(np.int64)
    labels = [format_rational(p) for p in pts]
    return MeshContinuum(ExplicitTable.from_scaled(t, vals.den, labels, check=False), ctx, name)


def saturate(C: MeshContinuum, a) -> np.ndarray:
    """All points indistinguishable from some point of ``a``."""
    a = C.subset(a)
    if a.size == 0:
        return a
    return np.nonzero(C.indist_balls().union_mask(a))[0].astype(np.int64)


def is_dense(C: MeshContinuum, a) -> bool:
    a = C.subset(a)
    if a.size == 0:
        return C.n == 0
    return bool(C.indist_balls().union_mask(a).all())


# ---------------------------------------------------------------- maps


class NoAlmostInverse(ValueError):
    def __init__(self, message: str, witness: int):
        self.witness = witness
        super().__init__(message)


@dataclass
class CarrierMap:
    """A total map on a continuum's carrier.

    ``codomain`` is a continuum (``images`` are carrier indices) or ``None``
    for the rational line (``images`` is an :class:`ExactArray` of values).
    """

    domain: MeshContinuum
    codomain: MeshContinuum | None
    images: object

    def __post_init__(self) -> None:
        if self.codomain is None:
            if not isinstance(self.images, ExactArray):
                self.images = ExactArray.from_rationals(self.images)
        else:
            self.images = np.asarray(self.images, dtype=np.int64)
            if self.images.size and (self.images.min() < 0 or self.images.max() >= self.codomain.n):
                raise ValueError("image index out of range")
        if len(self.images) != self.domain.n:
            raise ValueError("map must be total on the domain carrier")

    @classmethod
    def from_function(cls, domain: MeshContinuum, fn: Callable, codomain: MeshContinuum | None = None) -> "CarrierMap":
        """Build from ``fn(index) -> index`` (continuum codomain) or ``fn(point) -> value`` (line)."""
        if codomain is not None:
            return cls(domain, codomain, [fn(i) for i in range(domain.n)])
        src = domain.source
        if not isinstance(src, GridInterval):
            raise ValueError("real-valued maps need a grid domain")
        return cls(domain, None, ExactArray.from_rationals([fn(src.point(i)) for i in range(domain.n)]))

    @classmethod
    def identity(cls, C: MeshContinuum) -> "CarrierMap":
        return cls(C, C, np.arange(C.n, dtype=np.int64))

    @classmethod
    def constant(cls, domain: MeshContinuum, codomain: MeshContinuum, target: int) -> "CarrierMap":
        return cls(domain, codomain, np.full(domain.n, target, dtype=np.int64))

    def target_scale(self) -> int:
        return self.images.den if self.codomain is None else self.codomain.source.scale

    def target_threshold(self) -> Fraction:
        ctx = self.codomain.ctx if self.codomain is not None else self.domain.ctx
        return ctx.threshold

    def linear_coords(self):
        """Integer image coordinates when the codomain is a line, else None.

        For a line target the coordinate is the value numerator; for a grid
        target it is ``index * step``.  Either way ``d2 = |c_i - c_j| / S``.
        """
        if self.codomain is None:
            return self.images.num
        src = self.codomain.source
        if isinstance(src, GridInterval):
            return self.images * src.step
        return None

    def target_scaled_pairs(self, i, j):
        if self.codomain is None:
            return np.abs(self.images.num[i] - self.images.num[j])
        return self.codomain.source.scaled_pairs(self.images[i], self.images[j])

    def compose(self, other: "CarrierMap") -> "CarrierMap":
        """``other`` after ``self``."""
        if self.codomain is None:
            raise ValueError("cannot compose after a real-valued map")
        if other.codomain is None:
            return CarrierMap(self.domain, None, other.images[self.images])
        return CarrierMap(self.domain, other.codomain, other.images[self.images])


def function_sup_distance(f: CarrierMap, g: CarrierMap) -> Fraction:
    if f.domain is not g.domain and f.domain.n != g.domain.n:
        raise ValueError("maps have different domains")
    if f.codomain is None:
        diff = abs(f.images - g.images)
        return diff.max() if len(diff) else Fraction(0)
    d = f.codomain.source.scaled_pairs(f.images, g.images)
    return Fraction(int(d.max()) if len(d) else 0, f.codomain.source.scale)


def _sparse_table(values: np.ndarray, op) -> list[np.ndarray]:
    levels = [values]
    k = 1
    while 2 * k <= len(values):
        prev = levels[-1]
        levels.append(op(prev[:-k], prev[k:]))
        k *= 2
    return levels


def _range_query(levels: list[np.ndarray], op, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """``op`` over ``values[lo..hi]`` inclusive, vectorized over queries."""
    length = hi - lo + 1
    lvl = np.zeros(len(lo), dtype=np.int64)
    nz = length > 0
    lvl[nz] = np.floor(np.log2(length[nz])).astype(np.int64)
    # guard against float rounding at exact powers of two
    lvl = np.where((1 << (lvl + 1)) <= length, lvl + 1, lvl)
    lvl = np.where((1 << lvl) > length, lvl - 1, lvl)
    out = np.empty(len(lo), dtype=levels[0].dtype)
    for k in np.unique(lvl):
        sel = lvl == k
        tbl = levels[int(k)]
        span = 1 << int(k)
        out[sel] = op(tbl[lo[sel]], tbl[hi[sel] - span + 1])
    return out


class _Oscillation:
    """``osc(R) = max d2(f x, f y)`` over pairs with ``S1 * d1 <= R``, scaled by ``S2``."""

    def __init__(self, f: CarrierMap):
        self.f = f
        src = f.domain.source
        coords = f.linear_coords()
        self.fast = isinstance(src, GridInterval) and coords is not None
        if self.fast:
            self.coords = coords
            self.maxt = _sparse_table(coords, np.maximum)
            self.mint = _sparse_table(coords, np.minimum)
        self._cache: dict[int, int] = {}

    def __call__(self, R: int) -> int:
        if R in self._cache:
            return self._cache[R]
        f = self.f
        n = f.domain.n
        if R < 0:
            val = 0
        elif self.fast:
            w = f.domain.source.window(R)
            lo = np.arange(n, dtype=np.int64)
            hi = np.minimum(lo + w, n - 1)
            spread = _range_query(self.maxt, np.maximum, lo, hi) - _range_query(self.mint, np.minimum, lo, hi)
            val = int(spread.max()) if n else 0
        else:
            i, j = f.domain.source.ball_ranges(R).pairs()
            d = f.target_scaled_pairs(i, j)
            val = int(d.max()) if len(d) else 0
        self._cache[R] = val
        return val


@dataclass
class ContinuityReport:
    continuous_at_scale: bool
    preserves_indistinguishability: bool
    modulus: dict[int, int | None]
    sub_horizon: int
    witness: tuple[int, int] | None = None

    def to_json(self) -> dict:
        return {
            "continuous_at_scale": self.continuous_at_scale,
            "preserves_indistinguishability": self.preserves_indistinguishability,
            "sub_horizon": self.sub_horizon,
            "modulus": {str(k): v for k, v in self.modulus.items()},
        }


def continuity_report(f: CarrierMap, ladder: Sequence[int] | None = None) -> ContinuityReport:
    """Modulus table ``k -> least l`` with ``d1 < 1/l  =>  d2 < 1/k``.

    ``continuous_at_scale`` asks that every ``k`` up to ``isqrt(A)`` gets a
    modulus no larger than ``A``: accessible output precision from
    accessible input precision, with room left below the horizon.
    ``preserves_indistinguishability`` is the single-threshold reading
    ``d1 < 1/A  =>  d2 < 1/A``.
    """
    A = f.domain.ctx.horizon
    sub = max(1, math.isqrt(A))
    ks = sorted(set(ladder)) if ladder is not None else list(range(1, sub + 1))
    S1 = f.domain.source.scale
    S2 = f.target_scale()
    osc = _Oscillation(f)

    def osc_below(l: int) -> int:
        # pairs with d1 < 1/l, i.e. S1 * d1 <= ceil(S1 / l) - 1
        return osc(-(-S1 // l) - 1)

    dmin = f.domain.source.min_positive_scaled()
    # beyond l_max no distinct pair is closer than 1/l, so osc is 0
    l_max = 1 if dmin is None else -(-S1 // dmin)
    modulus: dict[int, int | None] = {}
    for k in ks:
        # osc < S2 / k  <=>  osc * k < S2
        if osc_below(l_max) * k >= S2:
            modulus[k] = None
            continue
        lo, hi = 1, l_max
        while lo < hi:
            mid = (lo + hi) // 2
            if osc_below(mid) * k < S2:
                hi = mid
            else:
                lo = mid + 1
        modulus[k] = lo
    continuous = all(modulus[k] is not None and modulus[k] <= A for k in ks if k <= sub)
    strict = osc_below(A) * A < S2
    return ContinuityReport(continuous, strict, modulus, sub)


@dataclass
class MorphismReport:
    injective_at_scale: bool
    surjective_at_scale: bool | None
    injective_witness: tuple[int, int] | None = None
    surjective_witness: int | None = None


def morphism_check(f: CarrierMap) -> MorphismReport:
    """``f x ~ f y  =>  x ~ y`` and every target point near some image."""
    A = f.domain.ctx.horizon
    S1 = f.domain.source.scale
    S2 = f.target_scale()
    n = f.domain.n
    # image pairs closer than 1/A: S2 * d2 <= R2
    R2 = -(-S2 // A) - 1
    inj_witness = None
    coords = f.linear_coords()
    if isinstance(f.domain.source, GridInterval) and coords is not None and n:
        w1 = f.domain.source.window(-(-S1 // A) - 1)
        order = np.argsort(coords, kind="stable")
        sc = coords[order]
        lo = np.searchsorted(sc, sc - R2, side="left")
        hi = np.searchsorted(sc, sc + R2, side="right") - 1
        ordi = order.astype(np.int64)
        mx = _range_query(_sparse_table(ordi, np.maximum), np.maximum, lo, hi)
        mn = _range_query(_sparse_table(ordi, np.minimum), np.minimum, lo, hi)
        bad = np.nonzero((mx - ordi > w1) | (ordi - mn > w1))[0]
        if bad.size:
            p = int(bad[0])
            i = int(ordi[p])
            j = int(mx[p]) if mx[p] - i > w1 else int(mn[p])
            inj_witness = (min(i, j), max(i, j))
    else:
        if f.codomain is None:
            ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
            ii, jj = ii.ravel(), jj.ravel()
            close = f.target_scaled_pairs(ii, jj) <= R2
            ii, jj = ii[close], jj[close]
        else:
            # domain points grouped by image, then joined through codomain balls
            order = np.argsort(f.images, kind="stable")
            sorted_img = f.images[order]
            cb = f.codomain.indist_balls()
            rows_i, rows_j = [], []
            for i in range(n):
                a, b = cb.rptr[f.images[i]], cb.rptr[f.images[i] + 1]
                for lo_, hi_ in zip(cb.rlo[a:b], cb.rhi[a:b]):
                    s = np.searchsorted(sorted_img, lo_, side="left")
                    e = np.searchsorted(sorted_img, hi_, side="right")
                    js = order[s:e]
                    rows_i.append(np.full(len(js), i, dtype=np.int64))
                    rows_j.append(js)
            ii = np.concatenate(rows_i) if rows_i else np.zeros(0, dtype=np.int64)
            jj = np.concatenate(rows_j) if rows_j else np.zeros(0, dtype=np.int64)
        d1 = f.domain.source.scaled_pairs(ii, jj)
        bad = np.nonzero(d1 * A >= S1)[0]
        if bad.size:
            inj_witness = (int(ii[bad[0]]), int(jj[bad[0]]))
    surj = None
    surj_witness = None
    if f.codomain is not None:
        covered = f.codomain.indist_balls().union_mask(np.unique(f.images))
        surj = bool(covered.all())
        if not surj:
            surj_witness = int(np.argmin(covered))
    return MorphismReport(inj_witness is None, surj, inj_witness, surj_witness)


def almost_inverse_search(f: CarrierMap) -> CarrierMap:
    """Pick for each target point the nearest image (lowest index on ties).

    Raises :class:`NoAlmostInverse` with a witness when some target has no
    image within ``1/A`` or a composite misses the identity by ``1/A``.
    """
    if f.codomain is None:
        raise ValueError("almost inverse needs a continuum codomain")
    C1, C2 = f.domain, f.codomain
    A = C2.ctx.horizon
    S2 = C2.source.scale
    n1, n2 = C1.n, C2.n
    coords = f.linear_coords()
    if coords is not None and n1:
        order = np.argsort(coords, kind="stable")
        sc = coords[order]
        targets = np.arange(n2, dtype=np.int64) * C2.source.step
        pos = np.searchsorted(sc, targets, side="left")
        left = np.clip(pos - 1, 0, n1 - 1)
        right = np.clip(pos, 0, n1 - 1)
        dl = np.abs(targets - sc[left])
        dr = np.abs(sc[right] - targets)
        # among equal coordinates argsort keeps the lowest domain index first
        first = np.searchsorted(sc, sc, side="left")
        cand_l = order[first[left]]
        cand_r = order[first[right]]
        pick_r = (dr < dl) | ((dr == dl) & (cand_r < cand_l))
        g_img = np.where(pick_r, cand_r, cand_l).astype(np.int64)
        best = np.where(pick_r, dr, dl)
    else:
        g_img = np.empty(n2, dtype=np.int64)
        best = np.empty(n2, dtype=object)
        for z in range(n2):
            d = C2.source.scaled_pairs(f.images, np.full(n1, z, dtype=np.int64))
            k = int(np.argmin(d))
            g_img[z] = k
            best[z] = d[k]
    far = np.nonzero(best * A >= S2)[0]
    if far.size:
        z = int(far[0])
        raise NoAlmostInverse(f"target point {z} has no image within 1/{A}", z)
    g = CarrierMap(C2, C1, g_img)
    gf = f.compose(g)
    back = C1.source.scaled_pairs(gf.images, np.arange(n1))
    bad = np.nonzero(back * C1.ctx.horizon >= C1.source.scale)[0]
    if bad.size:
        raise NoAlmostInverse(f"g(f(x)) is visibly far from x at domain point {int(bad[0])}", int(bad[0]))
    fg = g.compose(f)
    fwd = C2.source.scaled_pairs(fg.images, np.arange(n2))
    bad = np.nonzero(fwd * A >= S2)[0]
    if bad.size:
        raise NoAlmostInverse(f"f(g(z)) is visibly far from z at target point {int(bad[0])}", int(bad[0]))
    return g


def snap_map(fine: MeshContinuum, coarse: MeshContinuum) -> CarrierMap:
    """Map each fine grid point to the coarse grid point at or below it."""
    fs, cs = fine.source, coarse.source
    if not isinstance(fs, GridInterval) or not isinstance(cs, GridInterval):
        raise ValueError("snap needs two grids")
    pts = fs.points()
    # floor((x - a2) / eps2) with x = num/den
    shifted = pts - cs.a
    q = shifted.scale(1 / cs.eps)
    idx = np.array([int(v) for v in (q.num // q.den)], dtype=np.int64)
    idx = np.clip(idx, 0, cs.size() - 1)
    return CarrierMap(fine, coarse, idx)
