"""Optimal flows over time with departure-time choice, scheduling costs and tolls."""

from __future__ import annotations

from .assembler import (
    FlowOverTime,
    HorizonCurve,
    PathSchedule,
    Solution,
    assemble,
    horizon_for_demand,
    j_index,
    parametric_curve,
    path_schedule,
    primal_cost,
    solve,
    value_of_horizon,
    weak_unimodal_schedule,
)
from .duals import build_potentials, build_tolls, certify, duality_gap, equilibrium_check, verify_certificate
from .errors import DemandInfeasibleError, InputError, InvariantError, SchedFlowError
from .network import Arc, Network, StaticFlow
from .scheduling import SchedulingCost, cost_from_pieces, make_cost, make_eaf_cost, make_standard_cost
from .ssp import SSPDecomposition, successive_shortest_paths

__version__ = "0.1.0"

__all__ = [
    "Arc", "Network", "StaticFlow", "SSPDecomposition", "successive_shortest_paths",
    "SchedulingCost", "make_cost", "cost_from_pieces", "make_standard_cost", "make_eaf_cost",
    "FlowOverTime", "PathSchedule", "HorizonCurve", "Solution", "path_schedule", "value_of_horizon",
    "parametric_curve", "horizon_for_demand", "weak_unimodal_schedule", "assemble", "j_index",
    "primal_cost", "solve", "build_potentials", "build_tolls", "verify_certificate", "certify",
    "duality_gap", "equilibrium_check", "SchedFlowError", "InputError", "DemandInfeasibleError",
    "InvariantError",
]
