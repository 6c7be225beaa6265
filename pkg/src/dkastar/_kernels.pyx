# distutils: language = c++
# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: batched BIC regressions, subset-min DP, order-graph A*.

Mirrors ``_fallback`` operation by operation.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt, INFINITY, isfinite
from libc.stdint cimport int64_t, uint64_t
from libcpp.vector cimport vector

cnp.import_array()

NAME = "cython"

cdef double SINGULAR_RTOL = 1e-10
cdef double RSS_FLOOR_RTOL = 1e-12


def score_masks(gram, long n_obs, int target, masks):
    cdef const double[:, ::1] g = np.ascontiguousarray(gram, dtype=np.float64)
    cdef const int64_t[::1] ms = np.ascontiguousarray(masks, dtype=np.int64)
    cdef Py_ssize_t m = ms.shape[0]
    cdef int p = g.shape[0]
    values = np.empty(m)
    rss = np.empty(m)
    cdef double[::1] vv = values
    cdef double[::1] rv = rss
    cdef int idx[64]
    cdef double low[64 * 64]
    cdef double z[64]
    cdef double n = <double>n_obs
    cdef double logn = log(n)
    cdef double s_tt = g[target, target]
    cdef double floor = RSS_FLOOR_RTOL * (s_tt if s_tt > 1.0 else 1.0)
    cdef Py_ssize_t t
    cdef int i, j, l, k, b
    cdef uint64_t mask
    cdef double s, s2, d, r
    cdef bint singular
    with nogil:
        for t in range(m):
            mask = <uint64_t>ms[t]
            k = 0
            for b in range(p):
                if (mask >> b) & 1:
                    idx[k] = b
                    k += 1
            singular = False
            for j in range(k):
                s = g[idx[j], idx[j]]
                for l in range(j):
                    s -= low[j * 64 + l] * low[j * 64 + l]
                if s <= SINGULAR_RTOL * g[idx[j], idx[j]] or s <= 0.0:
                    singular = True
                    break
                d = sqrt(s)
                low[j * 64 + j] = d
                for i in range(j + 1, k):
                    s2 = g[idx[i], idx[j]]
                    for l in range(j):
                        s2 -= low[i * 64 + l] * low[j * 64 + l]
                    low[i * 64 + j] = s2 / d
            if singular:
                vv[t] = INFINITY
                rv[t] = INFINITY
                continue
            for j in range(k):
                s = g[idx[j], target]
                for l in range(j):
                    s -= low[j * 64 + l] * z[l]
                z[j] = s / low[j * 64 + j]
            r = s_tt
            for j in range(k):
                r -= z[j] * z[j]
            if r < floor:
                r = floor
            rv[t] = r
            vv[t] = k * logn + n * log(r / n)
    return values, rss


def subset_min(scores):
    best_a = np.array(scores, dtype=np.float64)
    cdef double[::1] best = best_a
    cdef Py_ssize_t size = best.shape[0]
    cdef int m = 0
    while (1 << m) < size:
        m += 1
    set_a = np.empty(size, dtype=np.int64)
    card_a = np.empty(size, dtype=np.int64)
    cdef int64_t[::1] bset = set_a
    cdef int64_t[::1] bcard = card_a
    cdef Py_ssize_t u, lo
    cdef int j
    cdef int64_t cc, uc
    cdef double cs, us
    with nogil:
        for u in range(size):
            if isfinite(best[u]):
                bset[u] = u
                bcard[u] = _popcount(<uint64_t>u)
            else:
                bset[u] = -1
                bcard[u] = 0
        for j in range(m):
            for u in range(size):
                if not ((u >> j) & 1):
                    continue
                lo = u ^ (<Py_ssize_t>1 << j)
                if bset[lo] < 0:
                    continue
                cs = best[lo]
                us = best[u]
                cc = bcard[lo]
                uc = bcard[u]
                if cs < us or (cs == us and (cc < uc or (cc == uc and bset[lo] < bset[u]))):
                    best[u] = cs
                    bcard[u] = cc
                    bset[u] = bset[lo]
    return best_a, set_a


cdef inline int _popcount(uint64_t x) nogil:
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


cdef inline uint64_t _compress(uint64_t u, int x) nogil:
    return (u & ((<uint64_t>1 << x) - 1)) | ((u >> (x + 1)) << x)


cdef inline uint64_t _expand(uint64_t c, int x) nogil:
    return (c & ((<uint64_t>1 << x) - 1)) | ((c >> x) << (x + 1))


def compress(subset, x):
    return int(_compress(<uint64_t>subset, <int>x))


def expand(cmask, x):
    return int(_expand(<uint64_t>cmask, <int>x))


cdef struct Entry:
    double f
    double g
    uint64_t u


cdef inline bint _before(Entry a, Entry b) nogil:
    if a.f != b.f:
        return a.f < b.f
    if a.g != b.g:
        return a.g > b.g
    return a.u < b.u


cdef void _push(vector[Entry]& heap, Entry e) noexcept nogil:
    heap.push_back(e)
    cdef size_t i = heap.size() - 1
    cdef size_t parent
    while i > 0:
        parent = (i - 1) >> 1
        if _before(heap[i], heap[parent]):
            heap[i], heap[parent] = heap[parent], heap[i]
            i = parent
        else:
            break


cdef Entry _pop(vector[Entry]& heap) noexcept nogil:
    cdef Entry top = heap[0]
    heap[0] = heap.back()
    heap.pop_back()
    cdef size_t n = heap.size()
    cdef size_t i = 0
    cdef size_t l, r, s
    while True:
        l = 2 * i + 1
        r = l + 1
        s = i
        if l < n and _before(heap[l], heap[s]):
            s = l
        if r < n and _before(heap[r], heap[s]):
            s = r
        if s == i:
            break
        heap[i], heap[s] = heap[s], heap[i]
        i = s
    return top


cdef inline double _h(uint64_t u, const double* hb, int p) nogil:
    cdef double h = 0.0
    cdef int x
    for x in range(p):
        if not ((u >> x) & 1):
            h += hb[x]
    return h


def order_astar(best, best_set, hbest):
    cdef const double[:, ::1] bs = np.ascontiguousarray(best, dtype=np.float64)
    cdef const int64_t[:, ::1] bset = np.ascontiguousarray(best_set, dtype=np.int64)
    hb_a = np.ascontiguousarray(hbest, dtype=np.float64)
    cdef const double[::1] hb = hb_a
    cdef int p = bs.shape[0]
    if not np.all(np.isfinite(hb_a)):
        raise ValueError("some variable has no feasible parent set")
    if p > 40:
        raise ValueError("order-graph search is limited to 40 variables")
    cdef uint64_t full = (<uint64_t>1 << p) - 1
    cdef Py_ssize_t nstates = <Py_ssize_t>1 << p
    gbest_a = np.full(nstates, np.inf)
    prev_a = np.zeros(nstates, dtype=np.int64)
    via_a = np.full(nstates, -1, dtype=np.int8)
    cdef double[::1] gbest = gbest_a
    cdef int64_t[::1] prev = prev_a
    cdef cnp.int8_t[::1] via = via_a
    cdef vector[Entry] heap
    cdef Entry e, ne
    cdef long expanded = 0
    cdef bint found = False
    cdef int x
    cdef uint64_t v
    cdef double cost, ng
    with nogil:
        gbest[0] = 0.0
        e.f = _h(0, &hb[0], p)
        e.g = 0.0
        e.u = 0
        _push(heap, e)
        while heap.size() > 0:
            e = _pop(heap)
            if e.g > gbest[e.u]:
                continue
            expanded += 1
            if e.u == full:
                found = True
                break
            for x in range(p):
                if (e.u >> x) & 1:
                    continue
                cost = bs[x, _compress(e.u, x)]
                if cost == INFINITY:
                    continue
                ng = e.g + cost
                v = e.u | (<uint64_t>1 << x)
                if ng < gbest[v]:
                    gbest[v] = ng
                    prev[v] = <int64_t>e.u
                    via[v] = x
                    ne.g = ng
                    ne.f = ng + _h(v, &hb[0], p)
                    ne.u = v
                    _push(heap, ne)
    if not found:
        raise ValueError("no DAG satisfies the constraints")
    order = []
    parents = np.zeros(p, dtype=np.int64)
    cdef uint64_t u = full
    cdef uint64_t pu
    while u:
        x = via[u]
        pu = <uint64_t>prev[u]
        parents[x] = <int64_t>_expand(<uint64_t>bset[x, _compress(pu, x)], x)
        order.append(x)
        u = pu
    order.reverse()
    return np.array(order, dtype=np.int64), parents, float(gbest[full]), int(expanded)
