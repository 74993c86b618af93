from __future__ import annotations

import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from schedflow.assembler import (
    PathSchedule,
    ScheduledPath,
    assemble,
    horizon_by_bisection,
    horizon_for_demand,
    j_index,
    parametric_curve,
    path_schedule,
    primal_cost,
    solve,
    step_function,
    value_of_horizon,
    weak_unimodal_schedule,
)
from schedflow.corpus import random_instance
from schedflow.errors import DemandInfeasibleError, InputError, InvariantError
from schedflow.network import Network
from schedflow.rational import INF
from schedflow.scheduling import IntervalUnion, cost_from_pieces, make_eaf_cost, make_standard_cost
from schedflow.ssp import successive_shortest_paths

from conftest import two_route_network, single_arc


def flat_cost():
    return cost_from_pieces(1, [(-INF, 0, -1, 0), (0, 1, 1, 0), (1, 2, 0, 1), (2, INF, 1, -1)])


def two_dip_cost():
    return cost_from_pieces(
        1, [(-INF, 0, F(-1, 2), 0), (0, 1, 1, 0), (1, 2, -1, 2), (2, 3, 0, 0), (3, INF, 3, -9)]
    )


def test_single_arc_schedule(std_cost):
    d = successive_shortest_paths(single_arc())
    sched = path_schedule(d, std_cost, 1)
    assert sched.paths[0].departures.intervals == ((-2, F(1, 2)),)
    assert value_of_horizon(d, std_cost, 1) == F(5, 2)
    assert value_of_horizon(d, std_cost, 0) == 0


def test_two_route_schedule_and_value(two_route, std_cost):
    d = successive_shortest_paths(two_route)
    s1 = path_schedule(d, std_cost, 1)
    assert s1.paths[0].departures.intervals == ((-2, F(1, 2)),)
    assert s1.paths[1].departures.intervals == ((-1, -1),)
    assert value_of_horizon(d, std_cost, 2) == F(15, 2)
    assert horizon_for_demand(d, std_cost, F(15, 2)) == 2
    assert horizon_for_demand(d, std_cost, 0) == 0


def test_two_route_assembled_rates(two_route, std_cost):
    sol = solve(two_route, std_cost, horizon=2)
    e = sol.flow.rates["e"]
    assert e(-4) == 1 and e(-2) == 2 and e(0) == 1 and e(2) == 0
    assert sol.flow.rates["f"](-2) == 1 and sol.flow.rates["g"](0) == 1
    assert sol.flow.value == F(15, 2)


def test_primal_cost_examples(two_route, std_cost):
    assert primal_cost(solve(single_arc(), std_cost, horizon=1).flow, std_cost) == F(5, 4)
    assert primal_cost(solve(two_route, std_cost, horizon=1).flow, std_cost) == F(5, 4)
    assert primal_cost(solve(two_route, std_cost, demand=0).flow, std_cost) == 0


def test_demand_errors(std_cost):
    unreachable = Network.build(["s", "t"], [("a", "t", "s", 1, 0)], "s", "t")
    with pytest.raises(DemandInfeasibleError):
        solve(unreachable, std_cost, demand=1)
    with pytest.raises(InputError):
        solve(single_arc(), std_cost)
    with pytest.raises(InputError):
        path_schedule(successive_shortest_paths(single_arc()), std_cost, -1)
    eaf = make_eaf_cost()
    # finite value tail: the earliest-arrival cost still grows without bound
    assert solve(single_arc(), eaf, demand=100).horizon == 100


def test_normalized_left_tail_makes_every_demand_reachable():
    # finite support is extended to the left with slope -alpha by the growth normalization
    c = cost_from_pieces(1, [(-1, 0, -1, 0), (0, 1, 1, 0)])
    d = successive_shortest_paths(single_arc())
    curve = parametric_curve(d, c)
    assert curve.supremum == INF
    assert value_of_horizon(d, c, horizon_for_demand(d, c, 50)) == 50


def test_weak_unimodal_examples():
    d = successive_shortest_paths(single_arc())
    c = flat_cost()
    for demand, delta in ((2, 0), (F(5, 2), F(1, 2))):
        sched = weak_unimodal_schedule(d, c, demand)
        assert sched.horizon == 1 and sched.interpolation == delta and sched.value == demand
    full = weak_unimodal_schedule(d, c, 3)
    assert full.paths[0].departures.intervals == ((-1, 2),)


@given(st.fractions(min_value=0, max_value=1))
def test_interpolated_value_is_affine(delta):
    d = successive_shortest_paths(single_arc())
    demand = 2 + delta
    sched = weak_unimodal_schedule(d, flat_cost(), demand)
    assert sched.value == demand
    assert sched.paths[0].departures.measure() == demand


def test_eaf_intervals_end_at_minus_delay(two_route):
    c = make_eaf_cost(1)
    for C in (F(1, 2), 2, 5):
        sched = path_schedule(successive_shortest_paths(two_route), c, C)
        for p in sched.paths:
            if c.alpha * p.delay <= C:
                assert p.departures.intervals == ((-C / c.alpha, -p.delay),)


def test_infeasible_schedule_is_rejected(two_route):
    d = successive_shortest_paths(two_route)
    bad = PathSchedule(F(0), (ScheduledPath(1, d.path(1), F(3), F(0), IntervalUnion(((0, 1),))),))
    with pytest.raises(InvariantError):
        assemble(two_route, bad)


def test_step_function_closed_superposition():
    f = step_function([(0, 1, 1), (1, 2, 1), (3, 3, 5)])
    assert f(F(1, 2)) == 1 and f(1) == 2 and f(3) == 5 and f(F(5, 2)) == 0


def stage_flow_equivalence_holds(sol, thetas) -> None:
    d = sol.decomposition
    net = sol.network
    for v in net.nodes:
        J = j_index(d, sol.cost, sol.horizon, v)
        for a in net.out_arcs(v):
            for th in thetas:
                assert sol.flow.rate(a.id, th) == d.flows[int(J(th))][a.id], (v, a.id, th)


def no_waiting(sol, thetas) -> None:
    net = sol.network
    for v in net.nodes:
        if v in (net.source, net.sink):
            continue
        nab = sol.flow.net_inflow(v)
        assert all(nab(th) == 0 for th in thetas)


@pytest.mark.parametrize("seed", range(12))
def test_flow_mimics_stage_flow_on_corpus(seed):
    inst = random_instance(seed)
    sol = solve(inst.network, inst.cost, horizon=inst.horizon)
    rng = random.Random(seed)
    bps = sol.flow.breakpoints()
    thetas = bps + [F(rng.randint(-4000, 4000), rng.randint(1, 97)) / 100 for _ in range(200)]
    stage_flow_equivalence_holds(sol, thetas)
    no_waiting(sol, thetas)


@pytest.mark.parametrize("cost", [flat_cost(), two_dip_cost(), make_eaf_cost(1)], ids=["flat", "two-dip", "eaf"])
@pytest.mark.parametrize("demand", [F(1, 2), 3, F(9, 2), 7])
def test_general_costs_assemble_feasibly(cost, demand):
    sol = solve(two_route_network(), cost, demand=demand)
    assert sol.flow.violations() == []
    assert sol.flow.value == demand
    primal_cost(sol.flow, cost)


def test_curve_examples(two_route, std_cost):
    single = parametric_curve(successive_shortest_paths(single_arc()), std_cost)
    assert single.knots == (0,) and single.tail_slope == F(5, 2)
    curve = parametric_curve(successive_shortest_paths(two_route), std_cost)
    assert curve.knots == (0, 1) and curve.is_continuous
    assert curve(1) == F(5, 2) and curve(2) == F(15, 2)
    jumpy = parametric_curve(successive_shortest_paths(single_arc()), flat_cost())
    assert not jumpy.is_continuous and jumpy.left_limits[-1] == 2 and jumpy.values[-1] == 3


@given(st.integers(0, 40), st.fractions(min_value=0, max_value=12, max_denominator=16))
def test_curve_matches_direct_evaluation(seed, C):
    inst = random_instance(seed)
    d = successive_shortest_paths(inst.network)
    curve = parametric_curve(d, inst.cost)
    assert curve(C) == value_of_horizon(d, inst.cost, C)


@given(st.integers(0, 40), st.fractions(min_value=F(1, 16), max_value=12, max_denominator=16))
def test_inverse_and_bisection_agree(seed, C):
    inst = random_instance(seed)
    d = successive_shortest_paths(inst.network)
    Q = value_of_horizon(d, inst.cost, C)
    exact = horizon_for_demand(d, inst.cost, Q)
    assert value_of_horizon(d, inst.cost, exact) == Q
    approx = horizon_by_bisection(d, inst.cost, Q, tol=F(1, 2**20))
    assert abs(approx - exact) <= F(1, 2**20)


@given(st.integers(0, 40), st.fractions(min_value=0, max_value=12, max_denominator=16))
def test_thresholds_nest_with_stage(seed, C):
    inst = random_instance(seed)
    d = successive_shortest_paths(inst.network)
    sched = path_schedule(d, inst.cost, C)
    for p, q_ in zip(sched.paths, sched.paths[1:]):
        assert q_.departures.shift(q_.delay).issubset(p.departures.shift(p.delay)) or not q_.departures.intervals
