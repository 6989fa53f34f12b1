"""Pure-Python reference kernels.

Every kernel works on a ball index stored as CSR-of-ranges: the ball of
point ``i`` is the union of the inclusive index ranges
``rlo[k]..rhi[k]`` for ``rptr[i] <= k < rptr[i + 1]``.  Ranges of one ball
are sorted and disjoint.  The compiled module mirrors these functions
one for one and must return identical arrays.
"""
from __future__ import annotations

import heapq

import numpy as np


class _Fenwick:
    def __init__(self, n: int, fill: int):
        self.n = n
        self.tree = [0] * (n + 1)
        if fill:
            for i in range(1, n + 1):
                self.tree[i] += fill
                j = i + (i & -i)
                if j <= n:
                    self.tree[j] += self.tree[i]

    def add(self, i: int, delta: int) -> None:
        i += 1
        tree, n = self.tree, self.n
        while i <= n:
            tree[i] += delta
            i += i & -i

    def prefix(self, i: int) -> int:
        """Sum of entries ``0..i-1``."""
        s = 0
        tree = self.tree
        while i > 0:
            s += tree[i]
            i -= i & -i
        return s


def _find(nxt: list, i: int) -> int:
    root = i
    while nxt[root] != root:
        root = nxt[root]
    while nxt[i] != root:
        nxt[i], i = root, nxt[i]
    return root


def _ball_count(fw: _Fenwick, rlo, rhi, a: int, b: int) -> int:
    c = 0
    for k in range(a, b):
        c += fw.prefix(rhi[k] + 1) - fw.prefix(rlo[k])
    return c


def greedy_cover(rptr, rlo, rhi, n: int, limit: int = -1) -> np.ndarray:
    """Greedy set cover by balls, most new points first, lowest index on ties.

    Stops early once ``limit`` centers are chosen (``limit < 0`` means no limit).
    """
    rptr, rlo, rhi = list(map(int, rptr)), list(map(int, rlo)), list(map(int, rhi))
    fw = _Fenwick(n, 1)
    # nxt[i] is the smallest uncovered index >= i; n is a sentinel
    nxt = list(range(n + 1))
    heap = [(-_ball_count(fw, rlo, rhi, rptr[i], rptr[i + 1]), i) for i in range(n)]
    heapq.heapify(heap)
    remaining = n
    centers = []
    while remaining > 0 and heap:
        if 0 <= limit <= len(centers):
            break
        _, i = heapq.heappop(heap)
        c = _ball_count(fw, rlo, rhi, rptr[i], rptr[i + 1])
        if heap and (-c, i) > heap[0]:
            heapq.heappush(heap, (-c, i))
            continue
        if c == 0:
            break
        centers.append(i)
        for k in range(rptr[i], rptr[i + 1]):
            j = _find(nxt, rlo[k])
            while j <= rhi[k]:
                fw.add(j, -1)
                remaining -= 1
                nxt[j] = j + 1
                j = _find(nxt, j + 1)
    return np.asarray(centers, dtype=np.int64)


def greedy_pack(rptr, rlo, rhi, n: int, limit: int = -1) -> np.ndarray:
    """Scan in index order, keeping points whose ball holds no kept point."""
    rptr, rlo, rhi = list(map(int, rptr)), list(map(int, rlo)), list(map(int, rhi))
    fw = _Fenwick(n, 0)
    kept = []
    for i in range(n):
        if 0 <= limit <= len(kept):
            break
        if _ball_count(fw, rlo, rhi, rptr[i], rptr[i + 1]) == 0:
            kept.append(i)
            fw.add(i, 1)
    return np.asarray(kept, dtype=np.int64)


def bfs(rptr, rlo, rhi, n: int, source: int) -> tuple[np.ndarray, np.ndarray]:
    """Hop distances and BFS parents from ``source``; unreached points get -1."""
    rptr, rlo, rhi = list(map(int, rptr)), list(map(int, rlo)), list(map(int, rhi))
    dist = [-1] * n
    parent = [-1] * n
    nxt = list(range(n + 1))
    dist[source] = 0
    nxt[source] = source + 1
    queue = [source]
    head = 0
    while head < len(queue):
        u = queue[head]
        head += 1
        du = dist[u] + 1
        for k in range(rptr[u], rptr[u + 1]):
            v = _find(nxt, rlo[k])
            while v <= rhi[k]:
                dist[v] = du
                parent[v] = u
                queue.append(v)
                nxt[v] = v + 1
                v = _find(nxt, v + 1)
    return np.asarray(dist, dtype=np.int64), np.asarray(parent, dtype=np.int64)


def components(rptr, rlo, rhi, n: int) -> np.ndarray:
    """Component label per point; labels follow the smallest member index."""
    rptr, rlo, rhi = list(map(int, rptr)), list(map(int, rlo)), list(map(int, rhi))
    label = [-1] * n
    nxt = list(range(n + 1))
    current = 0
    for s in range(n):
        if label[s] >= 0:
            continue
        label[s] = current
        nxt[s] = s + 1
        stack = [s]
        while stack:
            u = stack.pop()
            for k in range(rptr[u], rptr[u + 1]):
                v = _find(nxt, rlo[k])
                while v <= rhi[k]:
                    label[v] = current
                    nxt[v] = v + 1
                    stack.append(v)
                    v = _find(nxt, v + 1)
        current += 1
    return np.asarray(label, dtype=np.int64)


def bounded_dijkstra(aptr, adj, wts, n: int, source: int, radius: int) -> tuple[np.ndarray, np.ndarray]:
    """Shortest-path distances from ``source`` up to ``radius``.

    The graph is CSR (``aptr``, ``adj``) with positive integer weights.
    Returns the reached vertices in increasing index order and their
    distances.  A negative radius means unbounded.
    """
    aptr, adj = list(map(int, aptr)), list(map(int, adj))
    wts = [int(w) for w in wts]
    best = {source: 0}
    done = set()
    heap = [(0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for k in range(aptr[u], aptr[u + 1]):
            v = adj[k]
            nd = d + wts[k]
            if radius >= 0 and nd > radius:
                continue
            if v not in best or nd < best[v]:
                best[v] = nd
                heapq.heappush(heap, (nd, v))
    verts = sorted(best)
    # exact Python ints; numpy picks object dtype if they outgrow int64
    return np.asarray(verts, dtype=np.int64), np.asarray([best[v] for v in verts])
