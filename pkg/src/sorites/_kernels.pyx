# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels over CSR-of-ranges ball indices.

Mirrors ``_kernels_py`` function for function; results must match exactly.
"""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()

ctypedef cnp.int64_t i64


cdef inline i64 fw_prefix(i64* tree, i64 i) noexcept nogil:
    cdef i64 s = 0
    while i > 0:
        s += tree[i]
        i -= i & -i
    return s


cdef inline void fw_add(i64* tree, i64 n, i64 i, i64 delta) noexcept nogil:
    i += 1
    while i <= n:
        tree[i] += delta
        i += i & -i


cdef inline i64 dsu_find(i64* nxt, i64 i) noexcept nogil:
    cdef i64 root = i
    cdef i64 t
    while nxt[root] != root:
        root = nxt[root]
    while nxt[i] != root:
        t = nxt[i]
        nxt[i] = root
        i = t
    return root


cdef inline i64 ball_count(i64* tree, const i64[::1] rlo, const i64[::1] rhi, i64 a, i64 b) noexcept nogil:
    cdef i64 c = 0
    cdef i64 k
    for k in range(a, b):
        c += fw_prefix(tree, rhi[k] + 1) - fw_prefix(tree, rlo[k])
    return c


# binary min-heap of (key, idx) pairs compared lexicographically
cdef inline bint heap_less(i64* key, i64* idx, i64 a, i64 b) noexcept nogil:
    return key[a] < key[b] or (key[a] == key[b] and idx[a] < idx[b])


cdef inline void heap_swap(i64* key, i64* idx, i64 a, i64 b) noexcept nogil:
    cdef i64 t = key[a]
    key[a] = key[b]
    key[b] = t
    t = idx[a]
    idx[a] = idx[b]
    idx[b] = t


cdef void heap_down(i64* key, i64* idx, i64 size, i64 pos) noexcept nogil:
    cdef i64 child
    while True:
        child = 2 * pos + 1
        if child >= size:
            return
        if child + 1 < size and heap_less(key, idx, child + 1, child):
            child += 1
        if heap_less(key, idx, child, pos):
            heap_swap(key, idx, child, pos)
            pos = child
        else:
            return


cdef void heap_up(i64* key, i64* idx, i64 pos) noexcept nogil:
    cdef i64 parent
    while pos > 0:
        parent = (pos - 1) // 2
        if heap_less(key, idx, pos, parent):
            heap_swap(key, idx, pos, parent)
            pos = parent
        else:
            return


def greedy_cover(rptr, rlo, rhi, Py_ssize_t n, long long limit=-1):
    cdef const i64[::1] ptr = np.ascontiguousarray(rptr, dtype=np.int64)
    cdef const i64[::1] lo = np.ascontiguousarray(rlo, dtype=np.int64)
    cdef const i64[::1] hi = np.ascontiguousarray(rhi, dtype=np.int64)
    cdef i64* tree = <i64*>malloc((n + 1) * sizeof(i64))
    cdef i64* nxt = <i64*>malloc((n + 1) * sizeof(i64))
    cdef i64* key = <i64*>malloc((n + 1) * sizeof(i64))
    cdef i64* idx = <i64*>malloc((n + 1) * sizeof(i64))
    cdef i64* out = <i64*>malloc((n + 1) * sizeof(i64))
    cdef i64 i, j, k, c, size, remaining, count = 0
    if tree == NULL or nxt == NULL or key == NULL or idx == NULL or out == NULL:
        free(tree); free(nxt); free(key); free(idx); free(out)
        raise MemoryError()
    try:
        with nogil:
            for i in range(n + 1):
                tree[i] = 0
                nxt[i] = i
            for i in range(1, n + 1):
                tree[i] += 1
                j = i + (i & -i)
                if j <= n:
                    tree[j] += tree[i]
            for i in range(n):
                key[i] = -ball_count(tree, lo, hi, ptr[i], ptr[i + 1])
                idx[i] = i
            size = n
            i = size // 2
            while i >= 0:
                heap_down(key, idx, size, i)
                i -= 1
            remaining = n
            while remaining > 0 and size > 0:
                if limit >= 0 and count >= limit:
                    break
                i = idx[0]
                size -= 1
                key[0] = key[size]
                idx[0] = idx[size]
                heap_down(key, idx, size, 0)
                c = ball_count(tree, lo, hi, ptr[i], ptr[i + 1])
                if size > 0 and (-c > key[0] or (-c == key[0] and i > idx[0])):
                    key[size] = -c
                    idx[size] = i
                    heap_up(key, idx, size)
                    size += 1
                    continue
                if c == 0:
                    break
                out[count] = i
                count += 1
                for k in range(ptr[i], ptr[i + 1]):
                    j = dsu_find(nxt, lo[k])
                    while j <= hi[k]:
                        fw_add(tree, n, j, -1)
                        remaining -= 1
                        nxt[j] = j + 1
                        j = dsu_find(nxt, j + 1)
        result = np.empty(count, dtype=np.int64)
        for i in range(count):
            result[i] = out[i]
        return result
    finally:
        free(tree); free(nxt); free(key); free(idx); free(out)


def greedy_pack(rptr, rlo, rhi, Py_ssize_t n, long long limit=-1):
    cdef const i64[::1] ptr = np.ascontiguousarray(rptr, dtype=np.int64)
    cdef const i64[::1] lo = np.ascontiguousarray(rlo, dtype=np.int64)
    cdef const i64[::1] hi = np.ascontiguousarray(rhi, dtype=np.int64)
    cdef i64* tree = <i64*>malloc((n + 1) * sizeof(i64))
    cdef i64* out = <i64*>malloc((n + 1) * sizeof(i64))
    cdef i64 i, count = 0
    if tree == NULL or out == NULL:
        free(tree); free(out)
        raise MemoryError()
    try:
        with nogil:
            for i in range(n + 1):
                tree[i] = 0
            for i in range(n):
                if limit >= 0 and count >= limit:
                    break
                if ball_count(tree, lo, hi, ptr[i], ptr[i + 1]) == 0:
                    out[count] = i
                    count += 1
                    fw_add(tree, n, i, 1)
        result = np.empty(count, dtype=np.int64)
        for i in range(count):
            result[i] = out[i]
        return result
    finally:
        free(tree); free(out)


def bfs(rptr, rlo, rhi, Py_ssize_t n, Py_ssize_t source):
    cdef const i64[::1] ptr = np.ascontiguousarray(rptr, dtype=np.int64)
    cdef const i64[::1] lo = np.ascontiguousarray(rlo, dtype=np.int64)
    cdef const i64[::1] hi = np.ascontiguousarray(rhi, dtype=np.int64)
    dist_arr = np.full(n, -1, dtype=np.int64)
    parent_arr = np.full(n, -1, dtype=np.int64)
    cdef i64[::1] dist = dist_arr
    cdef i64[::1] parent = parent_arr
    cdef i64* nxt = <i64*>malloc((n + 1) * sizeof(i64))
    cdef i64* queue = <i64*>malloc((n + 1) * sizeof(i64))
    cdef i64 i, u, v, k, du, head = 0, tail = 0
    if nxt == NULL or queue == NULL:
        free(nxt); free(queue)
        raise MemoryError()
    try:
        with nogil:
            for i in range(n + 1):
                nxt[i] = i
            dist[source] = 0
            nxt[source] = source + 1
            queue[tail] = source
            tail += 1
            while head < tail:
                u = queue[head]
                head += 1
                du = dist[u] + 1
                for k in range(ptr[u], ptr[u + 1]):
                    v = dsu_find(nxt, lo[k])
                    while v <= hi[k]:
                        dist[v] = du
                        parent[v] = u
                        queue[tail] = v
                        tail += 1
                        nxt[v] = v + 1
                        v = dsu_find(nxt, v + 1)
        return dist_arr, parent_arr
    finally:
        free(nxt); free(queue)


def components(rptr, rlo, rhi, Py_ssize_t n):
    cdef const i64[::1] ptr = np.ascontiguousarray(rptr, dtype=np.int64)
    cdef const i64[::1] lo = np.ascontiguousarray(rlo, dtype=np.int64)
    cdef const i64[::1] hi = np.ascontiguousarray(rhi, dtype=np.int64)
    label_arr = np.full(n, -1, dtype=np.int64)
    cdef i64[::1] label = label_arr
    cdef i64* nxt = <i64*>malloc((n + 1) * sizeof(i64))
    cdef i64* stack = <i64*>malloc((n + 1) * sizeof(i64))
    cdef i64 i, s, u, v, k, top, current = 0
    if nxt == NULL or stack == NULL:
        free(nxt); free(stack)
        raise MemoryError()
    try:
        with nogil:
            for i in range(n + 1):
                nxt[i] = i
            for s in range(n):
                if label[s] >= 0:
                    continue
                label[s] = current
                nxt[s] = s + 1
                top = 0
                stack[top] = s
                top += 1
                while top > 0:
                    top -= 1
                    u = stack[top]
                    for k in range(ptr[u], ptr[u + 1]):
                        v = dsu_find(nxt, lo[k])
                        while v <= hi[k]:
                            label[v] = current
                            nxt[v] = v + 1
                            stack[top] = v
                            top += 1
                            v = dsu_find(nxt, v + 1)
                current += 1
        return label_arr
    finally:
        free(nxt); free(stack)


def bounded_dijkstra(aptr, adj, wts, Py_ssize_t n, Py_ssize_t source, long long radius):
    """Integer-weight Dijkstra; callers guarantee sums fit in int64."""
    cdef const i64[::1] ptr = np.ascontiguousarray(aptr, dtype=np.int64)
    cdef const i64[::1] nb = np.ascontiguousarray(adj, dtype=np.int64)
    cdef const i64[::1] w = np.ascontiguousarray(wts, dtype=np.int64)
    cdef Py_ssize_t m = nb.shape[0]
    cdef i64* best = <i64*>malloc((n + 1) * sizeof(i64))
    cdef char* done = <char*>malloc((n + 1) * sizeof(char))
    cdef i64* key = <i64*>malloc((m + 2) * sizeof(i64))
    cdef i64* idx = <i64*>malloc((m + 2) * sizeof(i64))
    cdef i64 i, u, v, k, d, nd, size = 0, reached = 0
    if best == NULL or done == NULL or key == NULL or idx == NULL:
        free(best); free(done); free(key); free(idx)
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                best[i] = -1
                done[i] = 0
            best[source] = 0
            key[0] = 0
            idx[0] = source
            size = 1
            while size > 0:
                d = key[0]
                u = idx[0]
                size -= 1
                key[0] = key[size]
                idx[0] = idx[size]
                heap_down(key, idx, size, 0)
                if done[u]:
                    continue
                done[u] = 1
                reached += 1
                for k in range(ptr[u], ptr[u + 1]):
                    v = nb[k]
                    nd = d + w[k]
                    if radius >= 0 and nd > radius:
                        continue
                    if best[v] < 0 or nd < best[v]:
                        best[v] = nd
                        key[size] = nd
                        idx[size] = v
                        heap_up(key, idx, size)
                        size += 1
        verts = np.empty(reached, dtype=np.int64)
        dists = np.empty(reached, dtype=np.int64)
        k = 0
        for i in range(n):
            if best[i] >= 0:
                verts[k] = i
                dists[k] = best[i]
                k += 1
        return verts, dists
    finally:
        free(best); free(done); free(key); free(idx)
