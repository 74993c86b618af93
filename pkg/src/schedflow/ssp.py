"""Successive shortest paths with full per-stage distance tables.

Stage ``j`` (``0 <= j <= m``) refers to the static flow after the first
``j`` augmentations. ``dist_to_t[j][v]`` and ``dist_to_s[j][v]`` are the
residual shortest-path distances from ``v`` to the sink and to the source at
that stage; path ``P_j`` (1-based) is a shortest s-t path of stage ``j - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DemandInfeasibleError, InvariantError
from .network import Network, ResidualArc, StaticFlow, distances_to, residual, shortest_path
from .rational import INF, fmt


@dataclass(frozen=True)
class SSPDecomposition:
    network: Network
    paths: tuple[tuple[ResidualArc, ...], ...]
    amounts: tuple[Fraction, ...]
    dist_to_s: tuple[dict, ...]
    dist_to_t: tuple[dict, ...]
    flows: tuple[StaticFlow, ...]

    @property
    def m(self) -> int:
        return len(self.paths)

    def path(self, j: int) -> tuple[ResidualArc, ...]:
        return self.paths[j - 1]

    def amount(self, j: int) -> Fraction:
        return self.amounts[j - 1]

    def path_delay(self, j: int) -> Fraction:
        """Delay of ``P_j``, i.e. the stage ``j - 1`` distance from s to t."""
        return self.dist_to_t[j - 1][self.network.source]

    @property
    def max_flow_value(self) -> Fraction:
        return sum(self.amounts, Fraction(0))

    def to_json(self) -> dict:
        nodes = self.network.nodes
        return {
            "paths": [
                {
                    "arcs": [r.to_json() for r in p],
                    "amount": fmt(x),
                    "delay": fmt(self.path_delay(j)),
                }
                for j, (p, x) in enumerate(zip(self.paths, self.amounts), start=1)
            ],
            "dist_to_s": [{str(v): fmt(d[v]) for v in nodes} for d in self.dist_to_s],
            "dist_to_t": [{str(v): fmt(d[v]) for v in nodes} for d in self.dist_to_t],
        }


def _augment(flow: StaticFlow, path, amount: Fraction) -> StaticFlow:
    vals = dict(flow.values)
    for r in path:
        vals[r.arc_id] += amount if r.forward else -amount
    return StaticFlow(flow.network, vals)


def successive_shortest_paths(network: Network) -> SSPDecomposition:
    s, t = network.source, network.sink
    flow = StaticFlow.zero(network)
    paths, amounts, to_s, to_t, flows = [], [], [], [], [flow]
    while True:
        g = residual(network, flow)
        dt = distances_to(g, t)
        to_t.append(dt)
        to_s.append(distances_to(g, s))
        if dt[s] == INF:
            break
        dist, path = shortest_path(g, s, t)
        assert dist == dt[s]
        x = min(r.capacity for r in path)
        paths.append(tuple(path))
        amounts.append(x)
        flow = _augment(flow, path, x)
        flows.append(flow)
    decomp = SSPDecomposition(network, tuple(paths), tuple(amounts), tuple(to_s), tuple(to_t), tuple(flows))
    check_invariants(decomp)
    return decomp


def check_invariants(decomp: SSPDecomposition) -> None:
    """Assert the distance-label invariants over every stage; raise InvariantError on failure."""
    net = decomp.network
    s = net.source
    delays = [decomp.path_delay(j) for j in range(1, decomp.m + 1)]
    if any(a > b for a, b in zip(delays, delays[1:])):
        raise InvariantError("shortest path lengths decreased along the SSP sequence")
    for j in range(1, decomp.m + 1):
        for v in net.nodes:
            if decomp.dist_to_s[j][v] > decomp.dist_to_s[j - 1][v]:
                raise InvariantError(f"d_j(v,s) increased at stage {j}, node {v!r}")
            lhs = decomp.dist_to_t[j - 1][v]
            lhs = INF if lhs == INF else lhs - decomp.dist_to_t[j - 1][s]
            if lhs != decomp.dist_to_s[j][v]:
                raise InvariantError(f"distance identity fails at stage {j}, node {v!r}")
        path = decomp.path(j)
        g = residual(net, decomp.flows[j - 1])
        caps = {(r.arc_id, r.forward): r.capacity for r in g.arcs}
        if decomp.amount(j) != min(caps[(r.arc_id, r.forward)] for r in path):
            raise InvariantError(f"amount of path {j} is not its bottleneck")


def stage_flow(decomp: SSPDecomposition, value) -> StaticFlow:
    """Min-cost static flow of the given value, by truncating the decomposition."""
    value = Fraction(value)
    if value < 0 or value > decomp.max_flow_value:
        raise DemandInfeasibleError(f"value {value} exceeds max flow {decomp.max_flow_value}")
    flow = decomp.flows[0]
    remaining = value
    for j in range(1, decomp.m + 1):
        if remaining == 0:
            break
        x = min(remaining, decomp.amount(j))
        flow = _augment(flow, decomp.path(j), x)
        remaining -= x
    return flow
