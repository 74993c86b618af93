"""Discrete time-expanded validation of the continuous optimum.

Layer ``i`` of the expanded graph stands for the time step ``[i*D, (i+1)*D)``.
An arc of delay ``tau`` links layer ``i`` of its tail to layer ``i + tau/D`` of
its head with capacity ``nu * D``; intermediate nodes may hold flow from one
layer to the next at cost ``alpha * D``. Flow that reaches the sink in layer
``i`` pays the average of rho over that step, which makes the discrete
problem a restriction of the continuous one: every discrete flow, read as a
piecewise-constant flow over time, is feasible with exactly the same cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import kernel
from .assembler import FlowOverTime, Solution, primal_cost, solve
from .errors import DemandInfeasibleError, InputError, InvariantError
from .network import Network
from .pwl import ZERO, PiecewiseLinear
from .rational import fmt, is_inf, lcm_of_denominators, q
from .scheduling import SchedulingCost, make_eaf_cost
from .ssp import successive_shortest_paths

SOURCE = ("*source*",)
SINK = ("*sink*",)


@dataclass(frozen=True)
class ExpandedArc:
    kind: str  # "move", "wait", "release" or "arrive"
    tail: object
    head: object
    capacity: Fraction | None  # None means uncapacitated
    cost: Fraction
    arc_id: str | None = None
    layer: int = 0


@dataclass(frozen=True)
class TimeExpandedGraph:
    network: Network
    cost: SchedulingCost | None
    delta: Fraction
    first: int
    last: int
    nodes: tuple
    arcs: tuple[ExpandedArc, ...]

    @property
    def window(self) -> tuple[Fraction, Fraction]:
        return self.first * self.delta, self.last * self.delta

    @property
    def layers(self) -> int:
        return max(0, self.last - self.first + 1)

    def count(self, kind: str) -> int:
        return sum(1 for a in self.arcs if a.kind == kind)


def _layer(x: Fraction, delta: Fraction) -> int:
    k = x / delta
    if k.denominator != 1:
        raise InputError(f"window end {x} is not a multiple of the time step {delta}")
    return int(k)


def expand(network: Network, cost: SchedulingCost | None, delta, window, *, release=None, arrive=None,
           waiting: bool = True) -> TimeExpandedGraph:
    """Build the time-expanded graph over layers ``window[0]/delta .. window[1]/delta``.

    ``release`` and ``arrive`` restrict the layers in which flow may leave the
    source or be absorbed at the sink (inclusive layer ranges). Without a
    cost every arc is free, which turns :func:`discrete_solve` into a max-flow.
    """
    delta = q(delta)
    if delta <= 0:
        raise InputError("time step must be positive")
    for a in network.arcs:
        if (a.delay / delta).denominator != 1:
            raise InputError(f"time step {delta} does not divide the delay of arc {a.id}")
    lo, hi = q(window[0]), q(window[1])
    first, last = _layer(lo, delta), _layer(hi, delta)
    alpha = cost.alpha if cost is not None else ZERO
    s, t = network.source, network.sink
    layers = range(first, last + 1)
    rel = range(release[0], release[1] + 1) if release else layers
    arr = range(arrive[0], arrive[1] + 1) if arrive else layers
    nodes = [SOURCE, SINK] + [(v, i) for i in layers for v in network.nodes]
    arcs: list[ExpandedArc] = []
    for i in layers:
        for a in network.arcs:
            j = i + int(a.delay / delta)
            if j <= last:
                arcs.append(ExpandedArc("move", (a.tail, i), (a.head, j), a.capacity * delta, alpha * a.delay, a.id, i))
        if waiting and i < last:
            for v in network.nodes:
                if v not in (s, t):
                    arcs.append(ExpandedArc("wait", (v, i), (v, i + 1), None, alpha * delta, None, i))
        if i in rel:
            arcs.append(ExpandedArc("release", SOURCE, (s, i), None, ZERO, None, i))
        if i in arr:
            if cost is None:
                arcs.append(ExpandedArc("arrive", (t, i), SINK, None, ZERO, None, i))
            else:
                c = cost.rho.integral(i * delta, (i + 1) * delta)
                if not is_inf(c):
                    arcs.append(ExpandedArc("arrive", (t, i), SINK, None, c / delta, None, i))
    return TimeExpandedGraph(network, cost, delta, first, last, tuple(nodes), tuple(arcs))


@dataclass(frozen=True)
class DiscreteResult:
    graph: TimeExpandedGraph
    value: Fraction
    cost: Fraction
    flows: tuple[Fraction, ...]


def discrete_solve(teg: TimeExpandedGraph, demand=None, backend: str | None = None) -> DiscreteResult:
    """Exact min-cost flow of value ``demand`` (max flow when ``demand`` is None)."""
    index = {v: k for k, v in enumerate(teg.nodes)}
    caps_q = [a.capacity for a in teg.arcs if a.capacity is not None]
    costs_q = [a.cost for a in teg.arcs]
    want = None if demand is None else q(demand)
    if want is not None and want < 0:
        raise InputError("demand must be nonnegative")
    cap_scale = lcm_of_denominators(caps_q + ([want] if want is not None else []))
    cost_scale = lcm_of_denominators(costs_q)
    finite_total = sum(int(c * cap_scale) for c in caps_q)
    big = finite_total + (int(want * cap_scale) if want is not None else 0) + 1
    tails = [index[a.tail] for a in teg.arcs]
    heads = [index[a.head] for a in teg.arcs]
    caps = [big if a.capacity is None else int(a.capacity * cap_scale) for a in teg.arcs]
    costs = [int(a.cost * cost_scale) for a in teg.arcs]
    limit = big if want is None else int(want * cap_scale)
    value, total, arc_flows = kernel.min_cost_flow(
        len(teg.nodes), tails, heads, caps, costs, index[SOURCE], index[SINK], limit, backend=backend
    )
    if want is not None and value < limit:
        raise DemandInfeasibleError(f"demand {want} does not fit in the window; discrete max flow is {Fraction(value, cap_scale)}")
    flows = tuple(Fraction(f, cap_scale) for f in arc_flows)
    exact = sum((f * a.cost for f, a in zip(flows, teg.arcs)), ZERO)
    if exact != Fraction(total, cap_scale * cost_scale):
        raise InvariantError("scaled kernel cost disagrees with the exact cost")
    return DiscreteResult(teg, Fraction(value, cap_scale), exact, flows)


def discrete_max_flow(teg: TimeExpandedGraph, backend: str | None = None) -> Fraction:
    return discrete_solve(teg, None, backend=backend).value


def _window_steps(entries: dict, delta: Fraction) -> PiecewiseLinear:
    """Step function equal to ``entries[i]`` on ``[i*delta, (i+1)*delta)`` (right-continuous)."""
    if not entries:
        return PiecewiseLinear.constant(0)
    lo, hi = min(entries), max(entries)
    breaks = [k * delta for k in range(lo, hi + 2)]
    cells = [(0, 0)] + [(0, entries.get(k, ZERO)) for k in range(lo, hi + 1)] + [(0, 0)]
    points = [c for _, c in cells[1:]]
    return PiecewiseLinear(breaks, cells, points).canonical()


def embed(result: DiscreteResult) -> FlowOverTime:
    """Read a discrete flow as a flow over time (rate = volume / step) with waiting."""
    teg = result.graph
    per_arc: dict = {a.id: {} for a in teg.network.arcs}
    for f, a in zip(result.flows, teg.arcs):
        if a.kind == "move" and f:
            per_arc[a.arc_id][a.layer] = per_arc[a.arc_id].get(a.layer, ZERO) + f / teg.delta
    rates = {aid: _window_steps(e, teg.delta) for aid, e in per_arc.items()}
    return FlowOverTime(teg.network, rates, None, None, allow_waiting=True)


def embedded_cost(result: DiscreteResult) -> Fraction:
    """Continuous cost of the embedded flow; checked equal to the discrete cost."""
    flow = embed(result)
    errs = flow.violations()
    if errs:
        raise InvariantError("embedded discrete flow is infeasible: " + "; ".join(errs))
    cost = primal_cost(flow, result.graph.cost)
    if cost != result.cost:
        raise InvariantError(f"embedded cost {cost} differs from discrete cost {result.cost}")
    return cost


def default_window(solution: Solution) -> tuple[Fraction, Fraction]:
    """Integer window around the support of the continuous solution, with margin."""
    bps = solution.flow.breakpoints()
    if not bps:
        return Fraction(-1), Fraction(1)
    longest = max((solution.decomposition.path_delay(j) for j in range(1, solution.decomposition.m + 1)), default=ZERO)
    return Fraction(math.floor(min(bps) - longest) - 1), Fraction(math.ceil(max(bps)) + 1)


@dataclass
class OracleLevel:
    delta: Fraction
    discrete_cost: Fraction | None
    continuous_cost: Fraction
    embedded_ok: bool = True
    note: str = ""

    @property
    def gap(self):
        return None if self.discrete_cost is None else self.discrete_cost - self.continuous_cost

    def to_json(self) -> dict:
        out = {
            "delta": fmt(self.delta),
            "discrete_cost": None if self.discrete_cost is None else fmt(self.discrete_cost),
            "continuous_cost": fmt(self.continuous_cost),
            "gap": None if self.gap is None else fmt(self.gap),
        }
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class OracleReport:
    levels: list = field(default_factory=list)
    window: tuple | None = None
    eaf: list | None = None

    @property
    def dominance(self) -> bool:
        return all(lv.gap is not None and lv.gap >= 0 and lv.embedded_ok for lv in self.levels)

    @property
    def monotone(self) -> bool:
        gaps = [lv.gap for lv in sorted(self.levels, key=lambda lv: -lv.delta) if lv.gap is not None]
        return all(b <= a for a, b in zip(gaps, gaps[1:]))

    @property
    def infeasible(self) -> bool:
        return any(lv.discrete_cost is None for lv in self.levels)

    @property
    def passed(self) -> bool:
        return self.dominance and self.monotone and (self.eaf is None or all(r["match"] for r in self.eaf))

    def to_json(self) -> dict:
        out = {
            "window": None if self.window is None else [fmt(x) for x in self.window],
            "levels": [lv.to_json() for lv in self.levels],
            "dominance": self.dominance,
            "gap_nonincreasing": self.monotone,
            "passed": self.passed,
        }
        if self.eaf is not None:
            out["earliest_arrival"] = self.eaf
        return out


def compare(solution: Solution, deltas=(1, Fraction(1, 2), Fraction(1, 4)), window=None,
            backend: str | None = None) -> OracleReport:
    """Discrete optimum at each step size against the continuous optimum.

    Every grid covers the same half-open window ``[L, R)`` so finer grids
    contain coarser ones and the gap cannot grow.
    """
    L, R = window if window is not None else default_window(solution)
    continuous = primal_cost(solution.flow, solution.cost)
    rep = OracleReport(window=(L, R))
    for d in deltas:
        d = q(d)
        teg = expand(solution.network, solution.cost, d, (L, R - d))
        try:
            res = discrete_solve(teg, solution.demand, backend=backend)
        except DemandInfeasibleError as exc:
            rep.levels.append(OracleLevel(d, None, continuous, False, str(exc)))
            continue
        embedded_cost(res)
        rep.levels.append(OracleLevel(d, res.cost, continuous))
    return rep


# -- earliest arrival ---------------------------------------------------------


def reversed_network(network: Network) -> Network:
    """Arcs reversed, source and sink swapped."""
    arcs = tuple(type(a)(a.id, a.head, a.tail, a.capacity, a.delay) for a in network.arcs)
    return Network(network.nodes, arcs, network.sink, network.source)


def max_flow_by_deadline(network: Network, deadline: int, backend: str | None = None) -> Fraction:
    """Most flow that can leave the source from time 0 and arrive by ``deadline`` (unit steps)."""
    if deadline <= 0:
        return ZERO
    teg = expand(network, None, 1, (0, deadline - 1))
    return discrete_max_flow(teg, backend=backend)


def latest_departure_profile(flow: FlowOverTime, span) -> Fraction:
    """Amount leaving the source during ``[-span, 0]``."""
    return -flow.net_inflow(flow.network.source).integral(-q(span), ZERO)


def eaf_cross_check(network: Network, solution: Solution | None = None, alpha=1, deadlines=None,
                    backend: str | None = None) -> list[dict]:
    """Compare the continuous earliest-arrival profile with discrete max flows by deadline.

    With the earliest-arrival cost the optimum sends as much as possible as
    late as possible; reversed in time and direction that is an earliest
    arrival flow, so the amount leaving the source in the last ``T`` time
    units equals the max flow by deadline ``T`` in the reversed network.
    """
    cost = make_eaf_cost(alpha)
    if solution is None:
        decomp = successive_shortest_paths(network)
        longest = max((decomp.path_delay(j) for j in range(1, decomp.m + 1)), default=ZERO)
        solution = solve(network, cost, horizon=cost.alpha * (longest + 3), decomposition=decomp)
    top = int(solution.horizon / solution.cost.alpha)
    if deadlines is None:
        deadlines = range(0, top + 1)
    rev = reversed_network(network)
    rows = []
    for T in deadlines:
        if T > top:
            raise InputError(f"deadline {T} exceeds the horizon-limited range {top}")
        cont = latest_departure_profile(solution.flow, T)
        disc = max_flow_by_deadline(rev, T, backend=backend)
        rows.append({"deadline": T, "continuous": fmt(cont), "discrete": fmt(disc), "match": cont == disc})
    return rows
