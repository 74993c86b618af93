"""Command-line front end.

Exit codes: 0 success, 1 parse error or time-step mismatch, 2 demand
infeasible, 3 certificate or oracle check failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .assembler import Solution, parametric_curve, primal_cost, solve
from .duals import build_potentials, build_tolls, certify, duality_gap, equilibrium_check, verify_certificate
from .errors import DemandInfeasibleError, InputError, InvariantError
from .files import (
    Instance,
    flow_from_json,
    flow_to_json,
    load_instance,
    safe_name,
    write_json,
    write_rate_csvs,
    write_series_csv,
)
from .oracle import compare, eaf_cross_check
from .rational import fmt, q
from .scheduling import make_eaf_cost
from .ssp import successive_shortest_paths

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_CHECK = 0, 1, 2, 3


def _solve(inst: Instance) -> Solution:
    return solve(inst.network, inst.cost, demand=inst.demand, horizon=inst.horizon)


def summary_json(sol: Solution) -> dict:
    cost = primal_cost(sol.flow, sol.cost)
    return {
        "demand": fmt(sol.demand),
        "horizon": fmt(sol.horizon),
        "primal_cost": fmt(cost),
        "original_scale_cost": fmt(cost + sol.cost.value_shift * sol.demand),
        "time_shift": fmt(sol.cost.time_shift),
        "value_shift": fmt(sol.cost.value_shift),
        "growth_normalized": sol.cost.was_growth_normalized,
        "interpolation": None if sol.schedule.interpolation is None else fmt(sol.schedule.interpolation),
        "paths": [
            {
                "index": p.index,
                "arcs": [("" if r.forward else "-") + r.arc_id for r in p.arcs],
                "amount": fmt(p.amount),
                "delay": fmt(p.delay),
                "intervals": p.departures.to_json(),
                "measure": fmt(p.departures.measure()),
            }
            for p in sol.schedule.paths
        ],
    }


def cmd_solve(args, inst: Instance) -> int:
    sol = _solve(inst)
    out = Path(args.out)
    write_json(out / "flow.json", flow_to_json(sol.flow))
    write_json(out / "schedule.json", sol.schedule.to_json())
    write_json(out / "decomposition.json", sol.decomposition.to_json())
    write_json(out / "summary.json", summary_json(sol))
    write_rate_csvs(out, sol.flow)
    return EXIT_OK


def cmd_tolls(args, inst: Instance) -> int:
    sol = _solve(inst)
    cert = build_potentials(sol.decomposition, sol.cost, sol.horizon)
    tolls = build_tolls(cert)
    rep = certify(sol.flow, cert, tolls)
    eq = equilibrium_check(sol.flow, cert, tolls, samples=args.samples, seed=args.seed)
    out = Path(args.out)
    write_json(out / "potentials.json", cert.to_json())
    write_json(out / "tolls.json", tolls.to_json(inst.network))
    report = rep.to_json()
    report["equilibrium"] = eq.to_json()
    report["passed"] = rep.passed and eq.passed
    write_json(out / "certificate_report.json", report)
    for a in inst.network.arcs:
        write_series_csv(out / "tolls" / f"{safe_name(a.id)}.csv", tolls[a.id], ("theta", "toll"))
    return EXIT_OK if report["passed"] else EXIT_CHECK


def cmd_curve(args, inst: Instance) -> int:
    decomp = successive_shortest_paths(inst.network)
    body = {"breakpoints": [], "tail_slope": "0", "continuous": True, "inverse": []}
    if decomp.m:
        body = parametric_curve(decomp, inst.cost).to_json()
    write_json(Path(args.out) / "curve.json", body)
    return EXIT_OK


def _deltas(text: str) -> list[Fraction]:
    try:
        vals = [q(x.strip()) for x in text.split(",") if x.strip()]
    except (InputError, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"--deltas: {exc}") from None
    if not vals or any(v <= 0 for v in vals):
        raise InputError("--deltas must list positive rationals")
    return vals


def cmd_oracle(args, inst: Instance) -> int:
    deltas = _deltas(args.deltas)
    for d in deltas:
        for a in inst.network.arcs:
            if (a.delay / d).denominator != 1:
                raise InputError(f"time step {fmt(d)} does not divide the delay of arc {a.id}")
    sol = _solve(inst)
    rep = compare(sol, deltas)
    if inst.is_eaf:
        rep.eaf = eaf_cross_check(inst.network, alpha=inst.cost.alpha)
    write_json(Path(args.out) / "oracle_report.json", rep.to_json())
    if rep.infeasible:
        return EXIT_INFEASIBLE
    return EXIT_OK if rep.passed else EXIT_CHECK


def cmd_eaf(args, inst: Instance) -> int:
    eaf = Instance(inst.network, make_eaf_cost(inst.cost.alpha), inst.demand, inst.horizon, "eaf")
    return cmd_solve(args, eaf)


def cmd_verify(args, inst: Instance) -> int:
    """Re-check a written flow.json against a fresh certificate without re-solving the flow."""
    try:
        with open(args.flow, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read flow: {exc}") from None
    flow = flow_from_json(obj, inst.network)
    if flow.horizon is None:
        raise InputError("flow.json has no horizon")
    decomp = successive_shortest_paths(inst.network)
    cert = build_potentials(decomp, inst.cost, flow.horizon)
    rep = verify_certificate(flow, cert)
    tolls = build_tolls(cert)
    rep.duality_gap = duality_gap(flow, cert, tolls, inst.cost)
    print(f"certificate {'passed' if rep.passed else 'FAILED'}; duality gap {fmt(rep.duality_gap)}")
    return EXIT_OK if rep.passed else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="schedflow", description="Optimal flows over time with scheduling costs.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, out_default="out"):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--instance", required=True, help="instance JSON file")
        sp.add_argument("--out", default=out_default, help="output directory")
        sp.set_defaults(func=func)
        return sp

    add("solve", cmd_solve, "optimal flow, schedule and summary")
    t = add("tolls", cmd_tolls, "potentials, tolls and the certificate report")
    t.add_argument("--samples", type=int, default=200, help="random (node, time) samples for the equilibrium check")
    t.add_argument("--seed", type=int, default=0)
    add("curve", cmd_curve, "parametric curve C -> Q(C)")
    o = add("oracle", cmd_oracle, "compare against the time-expanded discrete optimum")
    o.add_argument("--deltas", default="1,1/2,1/4", help="comma-separated time steps")
    add("eaf", cmd_eaf, "solve with the earliest-arrival cost")
    v = add("verify", cmd_verify, "re-verify a flow.json against the instance")
    v.add_argument("--flow", required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        inst = load_instance(args.instance)
        return args.func(args, inst)
    except DemandInfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvariantError as exc:
        print(f"internal check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
