"""Pure-Python integer min-cost flow (successive shortest paths with potentials).

Reference implementation and fallback for the compiled kernel; works on
arbitrary-precision ints, so it never overflows.
"""

from __future__ import annotations

import heapq


def min_cost_flow(n, tails, heads, caps, costs, s, t, max_amount):
    """Send up to ``max_amount`` units from ``s`` to ``t`` at minimum cost.

    Costs must be nonnegative. Returns ``(flow_value, total_cost, arc_flows)``
    where ``arc_flows[k]`` is the flow on input arc ``k``.
    """
    m = len(tails)
    # residual edges: 2k forward, 2k+1 reverse
    to = [0] * (2 * m)
    cap = [0] * (2 * m)
    cost = [0] * (2 * m)
    adj = [[] for _ in range(n)]
    for k in range(m):
        u, v = tails[k], heads[k]
        to[2 * k], cap[2 * k], cost[2 * k] = v, caps[k], costs[k]
        to[2 * k + 1], cap[2 * k + 1], cost[2 * k + 1] = u, 0, -costs[k]
        adj[u].append(2 * k)
        adj[v].append(2 * k + 1)
    pot = [0] * n
    flow = total = 0
    while flow < max_amount:
        dist = [None] * n
        prev = [-1] * n
        done = [False] * n
        dist[s] = 0
        heap = [(0, s)]
        while heap:
            d, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            if u == t:
                break
            pu = pot[u]
            for e in adj[u]:
                if cap[e] <= 0:
                    continue
                v = to[e]
                if done[v]:
                    continue
                nd = d + cost[e] + pu - pot[v]
                if dist[v] is None or nd < dist[v]:
                    dist[v] = nd
                    prev[v] = e
                    heapq.heappush(heap, (nd, v))
        if not done[t]:
            break
        dt = dist[t]
        for v in range(n):
            if done[v]:
                pot[v] += dist[v] - dt
        push = max_amount - flow
        v = t
        while v != s:
            e = prev[v]
            push = min(push, cap[e])
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
