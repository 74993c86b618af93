"""From an SSP decomposition and a cost horizon to an optimal flow over time.

Path ``P_j`` is used at rate ``x_j`` for every departure time ``xi`` with
``rho(xi + D_j) <= C - alpha * D_j``, where ``D_j`` is the delay of
``P_j``. The departure sets, their total value ``Q(C)``, the exact
piecewise-linear curve ``C -> Q(C)`` and the per-arc inflow step functions
all live here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import DemandInfeasibleError, InputError, InvariantError
from .network import Network, ResidualArc
from .pwl import ZERO, PiecewiseLinear, integrate_product
from .rational import INF, fmt, is_inf, q
from .scheduling import IntervalUnion, SchedulingCost
from .ssp import SSPDecomposition, successive_shortest_paths


@dataclass(frozen=True)
class ScheduledPath:
    index: int
    arcs: tuple[ResidualArc, ...]
    amount: Fraction
    delay: Fraction
    departures: IntervalUnion

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "arcs": [r.to_json() for r in self.arcs],
            "amount": fmt(self.amount),
            "delay": fmt(self.delay),
            "intervals": self.departures.to_json(),
        }


@dataclass(frozen=True)
class PathSchedule:
    horizon: Fraction
    paths: tuple[ScheduledPath, ...]
    interpolation: Fraction | None = None

    @property
    def value(self) -> Fraction:
        return sum((p.amount * p.departures.measure() for p in self.paths), ZERO)

    def to_json(self) -> dict:
        out = {"horizon": fmt(self.horizon), "value": fmt(self.value), "paths": [p.to_json() for p in self.paths]}
        if self.interpolation is not None:
            out["interpolation"] = fmt(self.interpolation)
        return out


def path_schedule(decomp: SSPDecomposition, cost: SchedulingCost, horizon) -> PathSchedule:
    """Maximal departure sets for every SSP path at cost horizon ``horizon``."""
    C = q(horizon)
    if C < 0:
        raise InputError("cost horizon must be nonnegative")
    out = []
    for j in range(1, decomp.m + 1):
        D = decomp.path_delay(j)
        z = C - cost.alpha * D
        deps = IntervalUnion() if z < 0 else cost.sublevel(z).shift(-D)
        if not deps.is_bounded:
            raise InputError("scheduling cost has an unbounded sublevel set; no finite optimum")
        out.append(ScheduledPath(j, decomp.path(j), decomp.amount(j), D, deps))
    return PathSchedule(C, tuple(out))


def value_of_horizon(decomp: SSPDecomposition, cost: SchedulingCost, horizon) -> Fraction:
    return path_schedule(decomp, cost, horizon).value


# -- parametric curve ----------------------------------------------------


@dataclass(frozen=True)
class HorizonCurve:
    """Exact right-continuous PWL map ``C -> Q(C)`` for ``C >= 0``.

    Affine between consecutive knots; ``left_limits[i]`` is ``Q(knots[i]-)``
    and differs from ``values[i]`` only where a flat piece of rho makes the
    departure sets jump. Beyond the last knot the slope is ``tail_slope``.
    """

    knots: tuple[Fraction, ...]
    values: tuple[Fraction, ...]
    left_limits: tuple[Fraction, ...]
    tail_slope: Fraction

    def __call__(self, C) -> Fraction:
        C = q(C)
        if C < 0:
            return ZERO
        k = self.knots
        if C >= k[-1]:
            return self.values[-1] + self.tail_slope * (C - k[-1])
        for i in range(len(k) - 1):
            if k[i] <= C < k[i + 1]:
                lo, hi = self.values[i], self.left_limits[i + 1]
                return lo + (hi - lo) * (C - k[i]) / (k[i + 1] - k[i])
        raise AssertionError("unreachable")

    @property
    def is_continuous(self) -> bool:
        return self.values == self.left_limits

    @property
    def supremum(self):
        return INF if self.tail_slope > 0 else self.values[-1]

    def minimal_horizon(self, demand) -> Fraction:
        """Smallest C with ``Q(C) >= demand``."""
        Q = q(demand)
        if Q < 0:
            raise InputError("demand must be nonnegative")
        k, vals, lefts = self.knots, self.values, self.left_limits
        for i in range(len(k)):
            if vals[i] >= Q:
                if i > 0 and lefts[i] >= Q:
                    lo, hi = vals[i - 1], lefts[i]
                    return k[i - 1] + (Q - lo) * (k[i] - k[i - 1]) / (hi - lo)
                return k[i]
        if self.tail_slope > 0:
            return k[-1] + (Q - vals[-1]) / self.tail_slope
        raise DemandInfeasibleError(f"demand {Q} exceeds the largest attainable value {vals[-1]}")

    def to_json(self) -> dict:
        return {
            "breakpoints": [
                {"horizon": fmt(c), "value": fmt(v), "left_limit": fmt(lv)}
                for c, v, lv in zip(self.knots, self.values, self.left_limits)
            ],
            "tail_slope": fmt(self.tail_slope),
            "continuous": self.is_continuous,
            "inverse": [{"value": fmt(v), "horizon": fmt(c)} for c, lv, v in zip(self.knots, self.left_limits, self.values)
                        for v in dict.fromkeys((lv, v))],
        }


def parametric_curve(decomp: SSPDecomposition, cost: SchedulingCost) -> HorizonCurve:
    """Build ``Q(C)`` exactly: it is affine between ``alpha*D_j + level`` knots."""
    levels = cost.levels()
    knots = {ZERO}
    for j in range(1, decomp.m + 1):
        base = cost.alpha * decomp.path_delay(j)
        knots.update(base + lv for lv in levels)
        knots.add(base)
    knots = sorted(c for c in knots if c >= 0)
    values = [value_of_horizon(decomp, cost, c) for c in knots]
    lefts = [ZERO]
    for i in range(1, len(knots)):
        mid = (knots[i - 1] + knots[i]) / 2
        lefts.append(2 * value_of_horizon(decomp, cost, mid) - values[i - 1])
    last = knots[-1]
    slope = value_of_horizon(decomp, cost, last + 1) - values[-1]
    if value_of_horizon(decomp, cost, last + 2) - values[-1] != 2 * slope:
        raise InvariantError("parametric curve is not affine beyond its last knot")
    return HorizonCurve(tuple(knots), tuple(values), tuple(lefts), slope)


def horizon_for_demand(decomp: SSPDecomposition, cost: SchedulingCost, demand, curve: HorizonCurve | None = None) -> Fraction:
    """Minimal C with ``Q(C) = demand`` (for a continuous curve; else the jump point).

    Pass ``curve`` to reuse an already built :func:`parametric_curve`.
    """
    if q(demand) > 0 and decomp.m == 0:
        raise DemandInfeasibleError("sink is unreachable from the source")
    return (curve or parametric_curve(decomp, cost)).minimal_horizon(demand)


def horizon_by_bisection(decomp: SSPDecomposition, cost: SchedulingCost, demand, tol=Fraction(1, 10**9)) -> Fraction:
    """Rational bisection on ``Q(C)``; a diagnostic cross-check for the exact curve."""
    Q = q(demand)
    if Q > 0 and decomp.m == 0:
        raise DemandInfeasibleError("sink is unreachable from the source")
    lo, hi = ZERO, Fraction(1)
    while value_of_horizon(decomp, cost, hi) < Q:
        hi *= 2
        if hi > 2**64:
            raise DemandInfeasibleError(f"demand {Q} not reached")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if value_of_horizon(decomp, cost, mid) >= Q:
            hi = mid
        else:
            lo = mid
    return hi


# -- flat levels (weakly unimodal or general rho) -------------------------


def _interpolate(big: IntervalUnion, small: IntervalUnion, delta: Fraction) -> IntervalUnion:
    """Grow ``small`` towards ``big`` by the fraction ``delta`` of every gap."""
    pieces = []
    for A, B in big:
        inner = [(a, b) for a, b in small if A <= a and b <= B]
        if not inner:
            pieces.append((A, A + delta * (B - A)))
            continue
        a0, b0 = inner[0][0], inner[-1][1]
        pieces.append(((1 - delta) * a0 + delta * A, a0))
        pieces.append((b0, (1 - delta) * b0 + delta * B))
        pieces.extend(inner)
        for (_, g1), (g2, _) in zip(inner, inner[1:]):
            pieces.append((g1, g1 + delta * (g2 - g1)))
    pieces.sort()
    merged: list[list] = []
    for a, b in pieces:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return IntervalUnion(tuple((a, b) for a, b in merged))


def weak_unimodal_schedule(decomp: SSPDecomposition, cost: SchedulingCost, demand) -> PathSchedule:
    """Schedule of exact value ``demand`` even where ``Q(C)`` jumps.

    At the jump horizon ``C0`` the departure sets are interpolated between
    the minimal sets (closure of the strict sublevel sets) and the maximal
    ones, with the weight chosen so the value is exactly ``demand``.
    """
    Q = q(demand)
    C0 = horizon_for_demand(decomp, cost, Q)
    high = path_schedule(decomp, cost, C0)
    if high.value == Q:
        return high
    small = []
    for p in high.paths:
        z = C0 - cost.alpha * p.delay
        small.append(IntervalUnion() if z < 0 else cost.sublevel(z, strict=True).shift(-p.delay))
    v0 = sum((p.amount * s.measure() for p, s in zip(high.paths, small)), ZERO)
    v1 = high.value
    if not v0 <= Q < v1:
        raise InvariantError("demand is not inside the jump of the parametric curve")
    delta = (Q - v0) / (v1 - v0)
    paths = tuple(
        ScheduledPath(p.index, p.arcs, p.amount, p.delay, _interpolate(p.departures, s, delta))
        for p, s in zip(high.paths, small)
    )
    sched = PathSchedule(C0, paths, interpolation=delta)
    if sched.value != Q:
        raise InvariantError("interpolated schedule misses the demand")
    return sched


# -- flows over time ------------------------------------------------------


def step_function(contribs: Sequence[tuple]) -> PiecewiseLinear:
    """Sum of ``value`` on closed intervals ``[lo, hi]`` as an exact step function."""
    bs = sorted({x for lo, hi, _ in contribs for x in (lo, hi)})
    if not bs:
        return PiecewiseLinear.constant(0)
    idx = {b: i for i, b in enumerate(bs)}
    cell_diff = [ZERO] * (len(bs) + 2)
    point_diff = [ZERO] * (len(bs) + 1)
    for lo, hi, v in contribs:
        i, k = idx[lo], idx[hi]
        cell_diff[i + 1] += v
        cell_diff[k + 1] -= v
        point_diff[i] += v
        point_diff[k + 1] -= v
    cells, points, acc = [], [], ZERO
    for i in range(len(bs) + 1):
        acc += cell_diff[i]
        cells.append((0, acc))
    acc = ZERO
    for i in range(len(bs)):
        acc += point_diff[i]
        points.append(acc)
    return PiecewiseLinear(bs, cells, points).canonical()


@dataclass(frozen=True)
class FlowOverTime:
    """Per-arc inflow rates as exact step functions.

    Value at a breakpoint is the closed-interval superposition, so the
    representation is exact pointwise and not just almost everywhere.
    """

    network: Network
    rates: dict
    horizon: Fraction | None = None
    schedule: PathSchedule | None = None
    allow_waiting: bool = False

    def rate(self, arc_id: str, theta) -> Fraction:
        return self.rates[arc_id](q(theta))

    def net_inflow(self, v) -> PiecewiseLinear:
        """``theta -> sum in f_e(theta - tau_e) - sum out f_e(theta)``."""
        net = self.network
        total = PiecewiseLinear.constant(0)
        for a in net.in_arcs(v):
            total = total + self.rates[a.id].shift(-a.delay)
        for a in net.out_arcs(v):
            total = total - self.rates[a.id]
        return total.canonical()

    @property
    def value(self) -> Fraction:
        return self.net_inflow(self.network.sink).integral()

    def breakpoints(self) -> list[Fraction]:
        out = set()
        for a in self.network.arcs:
            out.update(self.rates[a.id].breaks)
            out.update(b + a.delay for b in self.rates[a.id].breaks)
        return sorted(out)

    def violations(self) -> list[str]:
        """Feasibility problems (capacity, conservation, waiting); empty if feasible."""
        net = self.network
        errs = []
        for a in net.arcs:
            r = self.rates[a.id]
            vals = [c for _, c in r.cells] + list(r.points)
            if any(s != 0 for s, _ in r.cells):
                errs.append(f"arc {a.id}: rate is not piecewise constant")
            if min(vals) < 0 or max(vals) > a.capacity:
                errs.append(f"arc {a.id}: rate outside [0, {a.capacity}]")
            if r.cells[0][1] != 0 or r.cells[-1][1] != 0:
                errs.append(f"arc {a.id}: no compact support")
        for v in net.nodes:
            if v in (net.source, net.sink):
                continue
            nabla = self.net_inflow(v)
            if self.allow_waiting:
                z = nabla.antiderivative()
                if any(c < 0 for c in z.points) or z.cells[-1] != (ZERO, ZERO):
                    errs.append(f"node {v}: waiting amount negative or not returning to 0")
            elif nabla != PiecewiseLinear.constant(0):
                errs.append(f"node {v}: flow conservation without waiting fails")
        return errs

    def to_json(self) -> list:
        out = []
        for a in self.network.arcs:
            r = self.rates[a.id]
            pieces = [
                {"from": fmt(lo), "to": fmt(hi), "rate": fmt(c)}
                for lo, hi, _, c in r.iter_cells()
                if not (is_inf(lo) or is_inf(hi))
            ]
            points = [{"at": fmt(b), "rate": fmt(p)} for b, p in zip(r.breaks, r.points)]
            out.append({"arc_id": a.id, "pieces": pieces, "points": points})
        return out


def assemble(network: Network, schedule: PathSchedule, *, check: bool = True) -> FlowOverTime:
    """Superpose the scheduled paths into per-arc inflow rates.

    A forward arc reached ``p`` time units after departure gets ``+x_j`` on
    the shifted departure set; a backward arc reduces the original arc's
    inflow at the time flow would have entered it at the original tail.
    """
    contribs: dict = {a.id: [] for a in network.arcs}
    for sp in schedule.paths:
        offset = ZERO
        for r in sp.arcs:
            if r.forward:
                at, sign = offset, 1
            else:
                at, sign = offset + r.delay, -1
            for lo, hi in sp.departures:
                contribs[r.arc_id].append((lo + at, hi + at, sign * sp.amount))
            offset += r.delay
    rates = {aid: step_function(c) for aid, c in contribs.items()}
    flow = FlowOverTime(network, rates, schedule.horizon, schedule)
    if check:
        errs = flow.violations()
        if errs:
            raise InvariantError("assembled flow is infeasible: " + "; ".join(errs))
    return flow


def j_index(decomp: SSPDecomposition, cost: SchedulingCost, horizon, v) -> PiecewiseLinear:
    """Step function ``theta -> J(v, theta)``: the largest stage whose cost fits under C."""
    C = q(horizon)
    funcs = [PiecewiseLinear.constant(0)]
    for j in range(1, decomp.m + 1):
        z = C - cost.alpha * decomp.path_delay(j)
        d = decomp.dist_to_t[j - 1][v]
        if z < 0 or d == INF:
            continue
        ivs = cost.sublevel(z).shift(-d)
        funcs.append(PiecewiseLinear.indicator(ivs.intervals, value=j))
    return PiecewiseLinear.maximum(funcs).canonical()


def primal_cost(flow: FlowOverTime, cost: SchedulingCost) -> Fraction:
    """Objective value, computed arc-wise and (when a schedule exists) path-wise.

    Raises :class:`InvariantError` if the two disagree.
    """
    net = flow.network
    alpha = cost.alpha
    arrivals = flow.net_inflow(net.sink)
    total = integrate_product(cost.rho, arrivals)
    for a in net.arcs:
        if a.delay:
            total += alpha * a.delay * flow.rates[a.id].integral()
    if flow.allow_waiting:
        for v in net.nodes:
            if v not in (net.source, net.sink):
                total += alpha * flow.net_inflow(v).antiderivative().integral()
    if is_inf(total):
        return total
    if flow.schedule is not None:
        by_path = ZERO
        for p in flow.schedule.paths:
            for lo, hi in p.departures:
                if lo == hi:
                    continue
                by_path += p.amount * (alpha * p.delay * (hi - lo) + cost.rho.integral(lo + p.delay, hi + p.delay))
        if by_path != total:
            raise InvariantError(f"arc-based cost {total} != path-based cost {by_path}")
    return total


# -- end-to-end -------------------------------------------------------------


@dataclass(frozen=True)
class Solution:
    network: Network
    cost: SchedulingCost
    decomposition: SSPDecomposition
    curve: HorizonCurve | None
    schedule: PathSchedule
    flow: FlowOverTime

    @property
    def horizon(self) -> Fraction:
        return self.schedule.horizon

    @property
    def demand(self) -> Fraction:
        return self.schedule.value


def solve(network: Network, cost: SchedulingCost, *, demand=None, horizon=None, decomposition=None) -> Solution:
    """Optimal flow over time for a demand or a cost horizon (exactly one)."""
    if (demand is None) == (horizon is None):
        raise InputError("give exactly one of demand and horizon")
    decomp = decomposition or successive_shortest_paths(network)
    curve = None
    if demand is not None:
        Q = q(demand)
        if Q < 0:
            raise InputError("demand must be nonnegative")
        if Q > 0 and decomp.m == 0:
            raise DemandInfeasibleError("sink is unreachable from the source")
        if decomp.m == 0:
            schedule = PathSchedule(ZERO, ())
        else:
            curve = parametric_curve(decomp, cost)
            schedule = weak_unimodal_schedule(decomp, cost, Q)
    else:
        schedule = path_schedule(decomp, cost, horizon)
        curve = parametric_curve(decomp, cost) if decomp.m else None
    flow = assemble(network, schedule)
    return Solution(network, cost, decomp, curve, schedule, flow)
