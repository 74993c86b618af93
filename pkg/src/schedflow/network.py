"""Directed networks, static flows, residual graphs and shortest paths."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping

from .errors import InputError, InvariantError
from .rational import INF, Extended, q

Node = Hashable


@dataclass(frozen=True)
class Arc:
    id: str
    tail: Node
    head: Node
    capacity: Fraction
    delay: Fraction

    def __post_init__(self):
        object.__setattr__(self, "capacity", q(self.capacity))
        object.__setattr__(self, "delay", q(self.delay))
        if self.capacity < 0:
            raise InputError(f"arc {self.id}: negative capacity")
        if self.delay < 0:
            raise InputError(f"arc {self.id}: negative delay")


@dataclass(frozen=True)
class Network:
    """A directed multigraph with per-arc capacity and delay.

    Arcs are identified by id, so parallel arcs and digons are allowed.
    """

    nodes: tuple
    arcs: tuple[Arc, ...]
    source: Node
    sink: Node
    _by_id: dict = field(init=False, repr=False, compare=False)
    _out: dict = field(init=False, repr=False, compare=False)
    _in: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "arcs", tuple(self.arcs))
        if len(set(self.nodes)) != len(self.nodes):
            raise InputError("duplicate node ids")
        nodes = set(self.nodes)
        if self.source not in nodes or self.sink not in nodes:
            raise InputError("source and sink must be nodes of the network")
        if self.source == self.sink:
            raise InputError("source and sink must differ")
        by_id, out, inn = {}, {v: [] for v in self.nodes}, {v: [] for v in self.nodes}
        for a in self.arcs:
            if a.id in by_id:
                raise InputError(f"duplicate arc id {a.id!r}")
            if a.tail not in nodes or a.head not in nodes:
                raise InputError(f"arc {a.id!r} references an unknown node")
            by_id[a.id] = a
            out[a.tail].append(a)
            inn[a.head].append(a)
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_out", {v: tuple(x) for v, x in out.items()})
        object.__setattr__(self, "_in", {v: tuple(x) for v, x in inn.items()})

    @classmethod
    def build(cls, nodes: Iterable, arcs: Iterable[tuple], source, sink) -> "Network":
        """Convenience constructor from ``(id, tail, head, capacity, delay)`` tuples."""
        return cls(tuple(nodes), tuple(Arc(*a) for a in arcs), source, sink)

    def arc(self, arc_id: str) -> Arc:
        try:
            return self._by_id[arc_id]
        except KeyError:
            raise InputError(f"unknown arc id {arc_id!r}") from None

    def out_arcs(self, v) -> tuple[Arc, ...]:
        return self._out[v]

    def in_arcs(self, v) -> tuple[Arc, ...]:
        return self._in[v]

    def has_node(self, v) -> bool:
        return v in self._out


@dataclass(frozen=True)
class StaticFlow:
    """A feasible static s-t flow. Validated on construction."""

    network: Network
    values: Mapping[str, Fraction]

    def __post_init__(self):
        vals = {a.id: q(self.values.get(a.id, 0)) for a in self.network.arcs}
        extra = set(self.values) - set(vals)
        if extra:
            raise InputError(f"flow references unknown arcs {sorted(extra)}")
        for a in self.network.arcs:
            if not 0 <= vals[a.id] <= a.capacity:
                raise InputError(f"flow on arc {a.id!r} violates 0 <= f <= capacity")
        object.__setattr__(self, "values", vals)
        net = self.network
        for v in net.nodes:
            if v in (net.source, net.sink):
                continue
            if net_flow(self, v) != 0:
                raise InputError(f"flow conservation violated at node {v!r}")
        if net_flow(self, net.sink) != -net_flow(self, net.source):
            raise InputError("flow value at source and sink disagree")

    @classmethod
    def zero(cls, network: Network) -> "StaticFlow":
        return cls(network, {})

    @property
    def value(self) -> Fraction:
        return net_flow(self, self.network.sink)

    def cost(self) -> Fraction:
        return sum((self.values[a.id] * a.delay for a in self.network.arcs), Fraction(0))

    def __getitem__(self, arc_id: str) -> Fraction:
        return self.values[arc_id]


def net_flow(flow: StaticFlow, v) -> Fraction:
    """Inflow minus outflow at ``v``."""
    net = flow.network
    if not net.has_node(v):
        raise InputError(f"unknown node {v!r}")
    vals = flow.values
    return sum((vals[a.id] for a in net.in_arcs(v)), Fraction(0)) - sum(
        (vals[a.id] for a in net.out_arcs(v)), Fraction(0)
    )


@dataclass(frozen=True)
class ResidualArc:
    arc_id: str
    tail: Node
    head: Node
    capacity: Fraction
    delay: Fraction
    forward: bool

    @property
    def key(self) -> tuple:
        """Tie-breaking key: arc id first, forward before backward."""
        return (self.arc_id, 0 if self.forward else 1)

    def to_json(self) -> dict:
        return {"arc": self.arc_id, "forward": self.forward}


@dataclass(frozen=True)
class ResidualGraph:
    network: Network
    flow: StaticFlow
    arcs: tuple[ResidualArc, ...]


def residual(network: Network, flow: StaticFlow) -> ResidualGraph:
    if flow.network is not network and flow.network != network:
        raise InputError("flow belongs to a different network")
    arcs = []
    for a in network.arcs:
        f = flow.values[a.id]
        if f < a.capacity:
            arcs.append(ResidualArc(a.id, a.tail, a.head, a.capacity - f, a.delay, True))
        if f > 0:
            arcs.append(ResidualArc(a.id, a.head, a.tail, f, -a.delay, False))
    arcs.sort(key=lambda r: r.key)
    return ResidualGraph(network, flow, tuple(arcs))


def distances_to(graph: ResidualGraph, target) -> dict:
    """Shortest-path distance from every node to ``target``.

    Label-correcting with a |V| round cap; an improvement in round |V|
    means a negative cycle and raises :class:`InvariantError`.
    """
    nodes = graph.network.nodes
    if target not in set(nodes):
        raise InputError(f"unknown node {target!r}")
    dist: dict = {v: INF for v in nodes}
    dist[target] = Fraction(0)
    arcs = graph.arcs
    for _ in range(len(nodes)):
        changed = False
        for r in arcs:
            dh = dist[r.head]
            if dh != INF and dh + r.delay < dist[r.tail]:
                dist[r.tail] = dh + r.delay
                changed = True
        if not changed:
            return dist
    raise InvariantError("negative-delay cycle in residual graph")


def _tight_path(graph: ResidualGraph, start, target, dist: dict) -> list[ResidualArc]:
    """Lexicographically smallest simple path along tight arcs (depth-first)."""
    tight: dict = {}
    for r in graph.arcs:
        dh, dt = dist[r.head], dist[r.tail]
        if dh != INF and dt == dh + r.delay:
            tight.setdefault(r.tail, []).append(r)
    on_path = {start}
    path: list[ResidualArc] = []

    def dfs(v) -> bool:
        if v == target:
            return True
        for r in tight.get(v, ()):
            w = r.head
            if w in on_path:
                continue
            on_path.add(w)
            path.append(r)
            if dfs(w):
                return True
            path.pop()
            on_path.discard(w)
        return False

    if not dfs(start):
        raise InvariantError("no tight path although the target is reachable")
    return path


def shortest_path(graph: ResidualGraph, start, target) -> tuple[Extended, list[ResidualArc] | None]:
    """Delay-minimal path; ties go to the lexicographically smallest arc sequence."""
    if not graph.network.has_node(start):
        raise InputError(f"unknown node {start!r}")
    dist = distances_to(graph, target)
    if dist[start] == INF:
        return INF, None
    if start == target:
        return Fraction(0), []
    return dist[start], _tight_path(graph, start, target, dist)
