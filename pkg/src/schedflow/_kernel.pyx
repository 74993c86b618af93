# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled int64 min-cost flow; same algorithm and interface as ``_kernel_py``."""

from libc.stdlib cimport malloc, free
from libc.string cimport memset

ctypedef long long i64


cdef inline void _heap_push(i64* hk, int* hv, int* size, i64 key, int val) noexcept nogil:
    cdef int i = size[0]
    cdef int p
    size[0] += 1
    while i > 0:
        p = (i - 1) >> 1
        if hk[p] <= key:
            break
        hk[i] = hk[p]
        hv[i] = hv[p]
        i = p
    hk[i] = key
    hv[i] = val


cdef inline void _heap_pop(i64* hk, int* hv, int* size, i64* key, int* val) noexcept nogil:
    key[0] = hk[0]
    val[0] = hv[0]
    size[0] -= 1
    cdef int n = size[0]
    cdef i64 lk = hk[n]
    cdef int lv = hv[n]
    cdef int i = 0
    cdef int c
    while True:
        c = 2 * i + 1
        if c >= n:
            break
        if c + 1 < n and hk[c + 1] < hk[c]:
            c += 1
        if hk[c] >= lk:
            break
        hk[i] = hk[c]
        hv[i] = hv[c]
        i = c
    hk[i] = lk
    hv[i] = lv


def min_cost_flow(int n, tails, heads, caps, costs, int s, int t, max_amount):
    cdef int m = len(tails)
    cdef int E = 2 * m
    cdef int* to = <int*> malloc(max(E, 1) * sizeof(int))
    cdef i64* cap = <i64*> malloc(max(E, 1) * sizeof(i64))
    cdef i64* cost = <i64*> malloc(max(E, 1) * sizeof(i64))
    cdef int* start = <int*> malloc((n + 1) * sizeof(int))
    cdef int* order = <int*> malloc(max(E, 1) * sizeof(int))
    cdef int* fill = <int*> malloc((n + 1) * sizeof(int))
    cdef i64* pot = <i64*> malloc(max(n, 1) * sizeof(i64))
    cdef i64* dist = <i64*> malloc(max(n, 1) * sizeof(i64))
    cdef int* prev = <int*> malloc(max(n, 1) * sizeof(int))
    cdef char* done = <char*> malloc(max(n, 1) * sizeof(char))
    cdef char* seen = <char*> malloc(max(n, 1) * sizeof(char))
    cdef int hcap = E + n + 1
    cdef i64* hk = <i64*> malloc(hcap * sizeof(i64))
    cdef int* hv = <int*> malloc(hcap * sizeof(int))
    cdef int k, u, v, e, j, hsize
    cdef i64 d, nd, dt, push
    cdef i64 flow = 0
    cdef i64 total = 0
    cdef i64 limit = max_amount
    try:
        memset(start, 0, (n + 1) * sizeof(int))
        for k in range(m):
            u = tails[k]
            v = heads[k]
            to[2 * k] = v
            to[2 * k + 1] = u
            cap[2 * k] = caps[k]
            cap[2 * k + 1] = 0
            cost[2 * k] = costs[k]
            cost[2 * k + 1] = -cost[2 * k]
            start[u + 1] += 1
            start[v + 1] += 1
        for u in range(n):
            start[u + 1] += start[u]
            fill[u] = start[u]
        for k in range(m):
            u = tails[k]
            v = heads[k]
            order[fill[u]] = 2 * k
            fill[u] += 1
            order[fill[v]] = 2 * k + 1
            fill[v] += 1
        for u in range(n):
            pot[u] = 0
        with nogil:
            while flow < limit:
                for u in range(n):
                    done[u] = 0
                    seen[u] = 0
                    prev[u] = -1
                dist[s] = 0
                seen[s] = 1
                hsize = 0
                _heap_push(hk, hv, &hsize, 0, s)
                while hsize > 0:
                    _heap_pop(hk, hv, &hsize, &d, &u)
                    if done[u]:
                        continue
                    done[u] = 1
                    if u == t:
                        break
                    for j in range(start[u], start[u + 1]):
                        e = order[j]
                        if cap[e] <= 0:
                            continue
                        v = to[e]
                        if done[v]:
                            continue
                        nd = d + cost[e] + pot[u] - pot[v]
                        if not seen[v] or nd < dist[v]:
                            seen[v] = 1
                            dist[v] = nd
                            prev[v] = e
                            # each residual edge relaxes at most once per search, so hcap suffices
                            _heap_push(hk, hv, &hsize, nd, v)
                if not done[t]:
                    break
                dt = dist[t]
                for u in range(n):
                    if done[u]:
                        pot[u] += dist[u] - dt
                push = limit - flow
                v = t
                while v != s:
                    e = prev[v]
                    if cap[e] < push:
                        push = cap[e]
                    v = to[e ^ 1]
                v = t
                while v != s:
                    e = prev[v]
                    cap[e] -= push
                    cap[e ^ 1] += push
                    total += push * cost[e]
                    v = to[e ^ 1]
                flow += push
        arc_flows = [cap[2 * k + 1] for k in range(m)]
        return flow, total, arc_flows
    finally:
        free(to); free(cap); free(cost); free(start); free(order); free(fill)
        free(pot); free(dist); free(prev); free(done); free(seen); free(hk); free(hv)
