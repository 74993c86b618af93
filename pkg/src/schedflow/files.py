"""Instance parsing and artifact writers (JSON and CSV, written atomically)."""

from __future__ import annotations

import csv
from io import StringIO
import json
import os
import re
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .assembler import FlowOverTime
from .errors import InputError
from .network import Arc, Network
from .pwl import PiecewiseLinear
from .rational import INF, fmt, is_inf, q, qx
from .scheduling import SchedulingCost, cost_from_pieces, make_eaf_cost, make_standard_cost


@dataclass(frozen=True)
class Instance:
    network: Network
    cost: SchedulingCost
    demand: Fraction | None = None
    horizon: Fraction | None = None
    preset: str | None = None

    @property
    def is_eaf(self) -> bool:
        return self.preset == "eaf"


def _field(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"missing field {where}{key!r}")
    return obj[key]


def _num(value, where, extended=False):
    try:
        return qx(value) if extended else q(value)
    except (InputError, ValueError, TypeError, ZeroDivisionError) as exc:
        raise InputError(f"field {where}: {exc}") from None


def parse_network(obj) -> Network:
    nodes = _field(obj, "nodes", "network.")
    arcs_raw = _field(obj, "arcs", "network.")
    if not isinstance(nodes, list) or not isinstance(arcs_raw, list):
        raise InputError("field network.nodes and network.arcs must be lists")
    arcs = []
    for k, a in enumerate(arcs_raw):
        where = f"network.arcs[{k}]."
        arcs.append(Arc(
            str(_field(a, "id", where)),
            _field(a, "tail", where),
            _field(a, "head", where),
            _num(_field(a, "capacity", where), where + "capacity"),
            _num(_field(a, "delay", where), where + "delay"),
        ))
    return Network(tuple(nodes), tuple(arcs), _field(obj, "source", "network."), _field(obj, "sink", "network."))


_PRESET = re.compile(r"^\s*(standard|eaf)\s*(?:\((.*)\))?\s*$")


def parse_cost(obj) -> tuple[SchedulingCost, str | None]:
    if not isinstance(obj, dict):
        raise InputError("field cost must be an object")
    alpha = _num(obj.get("alpha", 1), "cost.alpha")
    preset = obj.get("preset")
    if preset is not None:
        m = _PRESET.match(str(preset))
        if not m:
            raise InputError(f"field cost.preset: unknown preset {preset!r}")
        name, args = m.group(1), m.group(2)
        if name == "eaf":
            return make_eaf_cost(alpha), "eaf"
        if args:
            parts = [p.strip() for p in args.split(",")]
            if len(parts) != 2:
                raise InputError("field cost.preset: standard(beta, gamma) needs two arguments")
            beta, gamma = parts
        else:
            beta, gamma = _field(obj, "beta", "cost."), _field(obj, "gamma", "cost.")
        return make_standard_cost(alpha, _num(beta, "cost.beta"), _num(gamma, "cost.gamma", extended=True)), "standard"
    pieces_raw = _field(obj, "pieces", "cost.")
    if not isinstance(pieces_raw, list) or not pieces_raw:
        raise InputError("field cost.pieces must be a nonempty list")
    pieces = []
    for k, p in enumerate(pieces_raw):
        where = f"cost.pieces[{k}]."
        lo = p.get("from") if isinstance(p, dict) else None
        hi = p.get("to") if isinstance(p, dict) else None
        pieces.append((
            -INF if lo is None else _num(lo, where + "from", extended=True),
            INF if hi is None else _num(hi, where + "to", extended=True),
            _num(_field(p, "slope", where), where + "slope"),
            _num(_field(p, "intercept", where), where + "intercept"),
        ))
    right = max(hi for _, hi, _, _ in pieces)
    if not is_inf(right) and not obj.get("plus_infinity_right", False):
        raise InputError("field cost.pieces: right tail is uncovered; set plus_infinity_right")
    return cost_from_pieces(alpha, pieces), None


def parse_instance(obj) -> Instance:
    if not isinstance(obj, dict):
        raise InputError("instance must be a JSON object")
    network = parse_network(_field(obj, "network", ""))
    cost, preset = parse_cost(_field(obj, "cost", ""))
    target = obj.get("target", {})
    if not isinstance(target, dict):
        raise InputError("field target must be an object")
    has_d, has_h = "demand" in target, "horizon" in target
    if has_d == has_h:
        raise InputError("field target: give exactly one of demand and horizon")
    demand = _num(target["demand"], "target.demand") if has_d else None
    horizon = _num(target["horizon"], "target.horizon") if has_h else None
    if (demand is not None and demand < 0) or (horizon is not None and horizon < 0):
        raise InputError("field target: value must be nonnegative")
    return Instance(network, cost, demand, horizon, preset)


def load_instance(path) -> Instance:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from None
    except OSError as exc:
        raise InputError(f"cannot read instance: {exc}") from None
    return parse_instance(obj)


# -- writers --------------------------------------------------------------


def write_text_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    write_text_atomic(path, json.dumps(obj, indent=2) + "\n")


def series_rows(f: PiecewiseLinear) -> list[tuple]:
    """``(theta, value)`` samples tracing the graph of ``f``, including jumps."""
    rows = []
    for k, b in enumerate(f.breaks):
        left, right = f.left_limit(b), f.right_limit(b)
        for v in dict.fromkeys((left, f.points[k], right)):
            rows.append((b, v))
    return rows


def write_series_csv(path, f: PiecewiseLinear, header=("theta", "value")) -> None:
    buf = StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for theta, v in series_rows(f):
        w.writerow([fmt(theta), fmt(v)])
    write_text_atomic(path, buf.getvalue())


def safe_name(s: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", str(s))


def write_rate_csvs(outdir, flow: FlowOverTime) -> None:
    for a in flow.network.arcs:
        write_series_csv(Path(outdir) / "rates" / f"{safe_name(a.id)}.csv", flow.rates[a.id], ("theta", "rate"))


def flow_to_json(flow: FlowOverTime) -> dict:
    out = {"arcs": flow.to_json()}
    if flow.horizon is not None:
        out["horizon"] = fmt(flow.horizon)
    out["value"] = fmt(flow.value)
    return out


def flow_from_json(obj, network: Network) -> FlowOverTime:
    """Rebuild a flow written by :func:`flow_to_json`."""
    rates = {}
    by_id = {e.get("arc_id"): e for e in _field(obj, "arcs", "flow.")}
    for a in network.arcs:
        e = by_id.get(a.id, {"pieces": [], "points": []})
        breaks = sorted({q(x) for p in e["pieces"] for x in (p["from"], p["to"])} | {q(p["at"]) for p in e["points"]})
        cell_of = {}
        for p in e["pieces"]:
            cell_of[(q(p["from"]), q(p["to"]))] = q(p["rate"])
        point_of = {q(p["at"]): q(p["rate"]) for p in e["points"]}
        bounds = [-INF] + breaks + [INF]
        cells = []
        for lo, hi in zip(bounds, bounds[1:]):
            rate = next((r for (a0, b0), r in cell_of.items() if a0 <= lo and hi <= b0), Fraction(0))
            cells.append((0, rate))
        points = [point_of.get(b, Fraction(0)) for b in breaks]
        rates[a.id] = PiecewiseLinear(breaks, cells, points).canonical()
    horizon = q(obj["horizon"]) if "horizon" in obj else None
    return FlowOverTime(network, rates, horizon)
