from __future__ import annotations

import copy
import json
from pathlib import Path

import pytest

from schedflow.cli import EXIT_CHECK, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_OK, main

INSTANCES = Path(__file__).resolve().parent.parent / "instances"
TWO_ROUTE = json.loads((INSTANCES / "two_route.json").read_text())


def write(tmp_path, obj, name="inst.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def run(*argv):
    return main([str(a) for a in argv])


def snapshot(root: Path) -> dict:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_solve_writes_outputs(tmp_path):
    out = tmp_path / "o"
    assert run("solve", "--instance", INSTANCES / "two_route.json", "--out", out) == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["horizon"] == 2 and summary["demand"] == "15/2"
    assert summary["primal_cost"] == "35/4"
    assert [p["index"] for p in summary["paths"]] == [1, 2]
    flow = json.loads((out / "flow.json").read_text())
    assert set(flow) == {"arcs", "horizon", "value"} and flow["value"] == "15/2"
    for name in ("schedule.json", "decomposition.json", "rates/e.csv", "rates/f.csv", "rates/g.csv"):
        assert (out / name).exists(), name


def test_solve_is_byte_identical_across_runs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    inst = INSTANCES / "two_route.json"
    for cmd in ("solve", "tolls", "curve"):
        assert run(cmd, "--instance", inst, "--out", a) == EXIT_OK
        assert run(cmd, "--instance", inst, "--out", b) == EXIT_OK
    assert snapshot(a) == snapshot(b)


def test_tolls_report(tmp_path):
    out = tmp_path / "o"
    assert run("tolls", "--instance", INSTANCES / "two_route.json", "--out", out, "--samples", 50) == EXIT_OK
    rep = json.loads((out / "certificate_report.json").read_text())
    assert rep["passed"] and rep["duality_gap"] == 0
    assert all(rep["conditions"].values())
    assert rep["equilibrium"]["passed"]
    assert (out / "tolls" / "g.csv").read_text().startswith("theta,toll")


def test_curve_single_arc(tmp_path):
    out = tmp_path / "o"
    assert run("curve", "--instance", INSTANCES / "single_arc.json", "--out", out) == EXIT_OK
    curve = json.loads((out / "curve.json").read_text())
    assert curve["continuous"] is True
    assert curve["tail_slope"] == "5/2"


def test_curve_of_disconnected_network_is_empty(tmp_path):
    inst = copy.deepcopy(TWO_ROUTE)
    inst["network"]["arcs"] = [a for a in inst["network"]["arcs"] if a["id"] != "e"]
    assert run("curve", "--instance", write(tmp_path, inst), "--out", tmp_path / "o") == EXIT_OK
    assert json.loads((tmp_path / "o" / "curve.json").read_text())["breakpoints"] == []


def test_oracle_command(tmp_path):
    out = tmp_path / "o"
    assert run("oracle", "--instance", INSTANCES / "two_route.json", "--out", out) == EXIT_OK
    rep = json.loads((out / "oracle_report.json").read_text())
    assert rep["passed"] and len(rep["levels"]) == 3


def test_oracle_runs_eaf_cross_check_for_eaf_preset(tmp_path):
    out = tmp_path / "o"
    assert run("oracle", "--instance", INSTANCES / "two_route_eaf.json", "--out", out, "--deltas", "1,1/2") == EXIT_OK
    rows = json.loads((out / "oracle_report.json").read_text())["earliest_arrival"]
    assert rows and all(r["match"] for r in rows)


@pytest.mark.parametrize("deltas", ["2/3", "0", "x", ""])
def test_oracle_bad_deltas(tmp_path, deltas):
    assert run("oracle", "--instance", INSTANCES / "two_route.json", "--out", tmp_path, "--deltas", deltas) == EXIT_INPUT


def test_eaf_command(tmp_path):
    out = tmp_path / "o"
    assert run("eaf", "--instance", INSTANCES / "two_route.json", "--out", out) == EXIT_OK
    assert json.loads((out / "summary.json").read_text())["demand"] == "15/2"


def test_verify_round_trip(tmp_path, capsys):
    out = tmp_path / "o"
    inst = INSTANCES / "two_route.json"
    assert run("solve", "--instance", inst, "--out", out) == EXIT_OK
    assert run("verify", "--instance", inst, "--out", out, "--flow", out / "flow.json") == EXIT_OK
    assert "duality gap 0" in capsys.readouterr().out


def test_verify_detects_tampered_flow(tmp_path):
    out = tmp_path / "o"
    inst = INSTANCES / "two_route.json"
    run("solve", "--instance", inst, "--out", out)
    flow = json.loads((out / "flow.json").read_text())
    other = tmp_path / "p"
    run("eaf", "--instance", inst, "--out", other)
    flow["arcs"] = json.loads((other / "flow.json").read_text())["arcs"]
    tampered = write(tmp_path, flow, "tampered.json")
    assert run("verify", "--instance", inst, "--out", out, "--flow", tampered) == EXIT_CHECK


def test_verify_missing_flow_file(tmp_path):
    assert run("verify", "--instance", INSTANCES / "two_route.json", "--flow", tmp_path / "nope.json") == EXIT_INPUT


def test_malformed_json_exits_1(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert run("solve", "--instance", p, "--out", tmp_path / "o") == EXIT_INPUT


@pytest.mark.parametrize(
    "patch",
    [
        lambda d: d["network"]["arcs"][0].update(capacity=-1),
        lambda d: d["network"].update(sink="zz"),
        lambda d: d.update(target={"demand": 1, "horizon": 1}),
        lambda d: d.update(target={}),
        lambda d: d["cost"].update(alpha=0),
        lambda d: d["cost"].update(preset="nope"),
    ],
    ids=["negative-capacity", "unknown-sink", "two-targets", "no-target", "zero-alpha", "unknown-preset"],
)
def test_invalid_instances_exit_1(tmp_path, patch):
    inst = copy.deepcopy(TWO_ROUTE)
    patch(inst)
    assert run("solve", "--instance", write(tmp_path, inst), "--out", tmp_path / "o") == EXIT_INPUT


def test_unreachable_sink_with_positive_demand_exits_2(tmp_path):
    inst = copy.deepcopy(TWO_ROUTE)
    inst["network"]["arcs"] = [a for a in inst["network"]["arcs"] if a["id"] != "e"]
    assert run("solve", "--instance", write(tmp_path, inst), "--out", tmp_path / "o") == EXIT_INFEASIBLE


def test_demand_target_recovers_horizon(tmp_path):
    inst = copy.deepcopy(TWO_ROUTE)
    inst["target"] = {"horizon": 2}
    out = tmp_path / "o"
    assert run("solve", "--instance", write(tmp_path, inst), "--out", out) == EXIT_OK
    assert json.loads((out / "summary.json").read_text())["demand"] == "15/2"
