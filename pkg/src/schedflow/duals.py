"""Node potentials, arc tolls and the optimality certificate.

Potentials are built stage by stage from the SSP distance tables and glued
together along the step function ``J(v, .)``. Tolls are the positive part of
the potential gap across each arc. :func:`verify_certificate` checks the four
optimality conditions exactly, cell by cell, on the common refinement of the
flow and the potentials.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .assembler import FlowOverTime, j_index, primal_cost
from .errors import InvariantError
from .network import Network
from .pwl import ZERO, PiecewiseLinear
from .rational import INF, fmt, is_inf, q
from .scheduling import SchedulingCost
from .ssp import SSPDecomposition


@dataclass(frozen=True)
class DualCertificate:
    network: Network
    cost: SchedulingCost
    horizon: Fraction
    potentials: dict
    j_steps: dict

    def __getitem__(self, v) -> PiecewiseLinear:
        return self.potentials[v]

    def to_json(self) -> dict:
        return {
            "horizon": fmt(self.horizon),
            "potentials": [{"node": str(v), **_pwl_json(self.potentials[v])} for v in self.network.nodes],
        }


@dataclass(frozen=True)
class TollSchedule:
    gaps: dict
    tolls: dict

    def __getitem__(self, arc_id) -> PiecewiseLinear:
        return self.tolls[arc_id]

    def to_json(self, network: Network) -> list:
        return [{"arc_id": a.id, **_pwl_json(self.tolls[a.id])} for a in network.arcs]


def _pwl_json(f: PiecewiseLinear) -> dict:
    pieces = []
    for lo, hi, s, c in f.iter_cells():
        pieces.append({
            "from": fmt(lo) if not is_inf(lo) else None,
            "to": fmt(hi) if not is_inf(hi) else None,
            "slope": fmt(s),
            "intercept": fmt(c),
        })
    points = [{"at": fmt(b), "value": fmt(p)} for b, p in zip(f.breaks, f.points)]
    return {"pieces": pieces, "points": points}


def stage_potential(decomp: SSPDecomposition, cost: SchedulingCost, horizon, v, j: int) -> PiecewiseLinear:
    """``max(-alpha d_j(v,s), C - alpha d_j(v,t) - rho(theta + d_j(v,t)), 0)``; infinite distances drop out."""
    C, alpha = q(horizon), cost.alpha
    terms = [PiecewiseLinear.constant(0)]
    ds = decomp.dist_to_s[j][v]
    if ds != INF:
        terms.append(PiecewiseLinear.constant(-alpha * ds))
    dt = decomp.dist_to_t[j][v]
    if dt != INF:
        terms.append(C - alpha * dt - cost.rho.shift(dt))
    return PiecewiseLinear.maximum(terms).canonical()


def build_potentials(decomp: SSPDecomposition, cost: SchedulingCost, horizon) -> DualCertificate:
    C = q(horizon)
    pots, steps = {}, {}
    for v in decomp.network.nodes:
        J = j_index(decomp, cost, C, v)
        used = sorted({c for _, c in J.cells} | set(J.points))
        choices = {j: stage_potential(decomp, cost, C, v, int(j)) for j in used}
        pots[v] = PiecewiseLinear.select(J, choices).canonical()
        steps[v] = J
    return DualCertificate(decomp.network, cost, C, pots, steps)


def potential_gap(cert: DualCertificate, arc) -> PiecewiseLinear:
    """``theta -> pi_head(theta + tau) - pi_tail(theta) - alpha tau``."""
    return (cert[arc.head].shift(arc.delay) - cert[arc.tail] - cert.cost.alpha * arc.delay).canonical()


def build_tolls(cert: DualCertificate, network: Network | None = None) -> TollSchedule:
    network = network or cert.network
    gaps, tolls = {}, {}
    for a in network.arcs:
        g = potential_gap(cert, a)
        gaps[a.id] = g
        tolls[a.id] = g.positive_part().canonical()
    return TollSchedule(gaps, tolls)


# -- verification ---------------------------------------------------------


@dataclass
class CertificateReport:
    conditions: dict = field(default_factory=lambda: {k: True for k in ("i", "ii", "iii", "iv")})
    witnesses: list = field(default_factory=list)
    duality_gap: Fraction | None = None

    @property
    def passed(self) -> bool:
        return all(self.conditions.values()) and (self.duality_gap is None or self.duality_gap == 0)

    def fail(self, cond: str, **info) -> None:
        self.conditions[cond] = False
        self.witnesses.append({"condition": cond, **{k: _jsonable(v) for k, v in info.items()}})

    def to_json(self) -> dict:
        out = {
            "passed": self.passed,
            "conditions": dict(self.conditions),
            "witnesses": self.witnesses,
            "enforcement": "weak",
        }
        if self.duality_gap is not None:
            out["duality_gap"] = fmt(self.duality_gap)
        return out


def _jsonable(v):
    if isinstance(v, (Fraction, int, float)) and not isinstance(v, bool):
        return fmt(v)
    return v


def _cell_ends(lo, hi, s, c) -> list:
    """Values of a cell at its ends; an unbounded end contributes its limit sign."""
    if is_inf(c):
        return [c]
    out = []
    for x, right in ((lo, False), (hi, True)):
        if is_inf(x):
            out.append(ZERO if s == 0 else (1 if (s > 0) == right else -1) * INF)
        else:
            out.append(s * x + c)
    if s == 0:
        out.append(c)
    return out


def _probe(lo, hi):
    if is_inf(lo) and is_inf(hi):
        return ZERO
    if is_inf(lo):
        return hi - 1
    if is_inf(hi):
        return lo + 1
    return (lo + hi) / 2


def verify_certificate(flow: FlowOverTime, cert: DualCertificate, network: Network | None = None) -> CertificateReport:
    network = network or flow.network
    alpha, C, rho = cert.cost.alpha, cert.horizon, cert.cost.rho
    rep = CertificateReport()

    # (i) theta -> pi_v(theta) - alpha theta nonincreasing
    for v in network.nodes:
        pi = cert[v]
        for lo, hi, s, c in pi.iter_cells():
            if not is_inf(c) and s > alpha:
                rep.fail("i", node=str(v), theta=_probe(lo, hi), detail="slope exceeds alpha")
            if is_inf(c):
                rep.fail("i", node=str(v), theta=_probe(lo, hi), detail="infinite potential")
        for b, p in zip(pi.breaks, pi.points):
            if not pi.left_limit(b) >= p >= pi.right_limit(b):
                rep.fail("i", node=str(v), theta=b, detail="upward jump")

    # (ii) gap <= 0 on forward residual arcs, >= 0 on backward ones
    for a in network.arcs:
        gap = potential_gap(cert, a)
        f, g = PiecewiseLinear._common([flow.rates[a.id], gap])
        for (lo, hi, _, fc), (_, _, gs, gc) in zip(f.iter_cells(), g.iter_cells()):
            ends = _cell_ends(lo, hi, gs, gc)
            if fc < a.capacity and max(ends) > 0:
                rep.fail("ii", arc=a.id, theta=_probe(lo, hi), detail="forward residual arc with positive gap")
            if fc > 0 and min(ends) < 0:
                rep.fail("ii", arc=a.id, theta=_probe(lo, hi), detail="backward residual arc with negative gap")
        for b, fp, gp in zip(f.breaks, f.points, g.points):
            if fp < a.capacity and gp > 0:
                rep.fail("ii", arc=a.id, theta=b, detail="forward residual arc with positive gap")
            if fp > 0 and gp < 0:
                rep.fail("ii", arc=a.id, theta=b, detail="backward residual arc with negative gap")

    # (iii) pi_s == 0
    if cert[network.source] != PiecewiseLinear.constant(0):
        sup = cert[network.source].support_bounds()
        rep.fail("iii", node=str(network.source), theta=sup[0] if sup else 0, detail="source potential is not 0")

    # (iv) pi_t = (C - rho)^+ and no arrivals where rho > C
    want = (C - rho).positive_part().canonical()
    if cert[network.sink] != want:
        diff = PiecewiseLinear._common([cert[network.sink], want])
        theta = next((b for b, x, y in zip(diff[0].breaks, diff[0].points, diff[1].points) if x != y), None)
        rep.fail("iv", node=str(network.sink), theta=theta, detail="sink potential differs from (C - rho)^+")
    arrivals = flow.net_inflow(network.sink)
    r, d = PiecewiseLinear._common([rho, arrivals])
    for (lo, hi, rs, rc), (_, _, _, dc) in zip(r.iter_cells(), d.iter_cells()):
        if dc != 0 and max(_cell_ends(lo, hi, rs, rc)) > C:
            rep.fail("iv", node=str(network.sink), theta=_probe(lo, hi), detail="arrivals where rho exceeds C")
    for b, rp, dp in zip(r.breaks, r.points, d.points):
        if dp != 0 and rp > C:
            rep.fail("iv", node=str(network.sink), theta=b, detail="arrivals where rho exceeds C")
    return rep


def duality_gap(flow: FlowOverTime, cert: DualCertificate, tolls: TollSchedule, cost: SchedulingCost | None = None) -> Fraction:
    """Primal cost minus the dual objective ``C Q - sum nu_e * integral(toll_e)``."""
    cost = cost or cert.cost
    network = flow.network
    dual = cert.horizon * flow.value
    for a in network.arcs:
        if a.capacity:
            dual -= a.capacity * tolls[a.id].integral()
    return primal_cost(flow, cost) - dual


def certify(flow: FlowOverTime, cert: DualCertificate, tolls: TollSchedule) -> CertificateReport:
    rep = verify_certificate(flow, cert)
    rep.duality_gap = duality_gap(flow, cert, tolls)
    if rep.duality_gap != 0:
        rep.witnesses.append({"condition": "duality_gap", "value": fmt(rep.duality_gap)})
    return rep


# -- equilibrium under tolls ----------------------------------------------


def simple_paths(network: Network, start, target, limit: int = 10000) -> list[tuple]:
    """All simple ``start``-``target`` paths as arc tuples (bounded enumeration)."""
    out: list[tuple] = []

    def walk(v, seen, acc):
        if len(out) >= limit:
            return
        if v == target:
            out.append(tuple(acc))
            return
        for a in network.out_arcs(v):
            if a.head not in seen:
                walk(a.head, seen | {a.head}, acc + [a])

    walk(start, {start}, [])
    return out


def trip_cost(path, depart, waits, cost: SchedulingCost, tolls: TollSchedule):
    """Total disutility of leaving at ``depart`` and waiting ``waits[k]`` before arc ``k``."""
    theta, total = q(depart), ZERO
    for a, w in zip(path, waits):
        theta += w
        total += tolls[a.id](theta)
        theta += a.delay
    spent = theta - q(depart)
    return cost.rho(theta) + cost.alpha * spent + total


@dataclass
class EquilibriumReport:
    checked: int = 0
    tight: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"passed": self.passed, "checked": self.checked, "tight": self.tight, "failures": self.failures}


def equilibrium_check(flow: FlowOverTime, cert: DualCertificate, tolls: TollSchedule, samples: int = 200,
                      seed: int = 0) -> EquilibriumReport:
    """Sampled check that no route beats ``C - pi_v`` and used routes from s cost exactly C."""
    network, cost, C = flow.network, cert.cost, cert.horizon
    rng = random.Random(seed)
    rep = EquilibriumReport()
    bps = flow.breakpoints() or [ZERO]
    lo, hi = min(bps) - 2, max(bps) + 2
    den = 64

    def rand_time():
        return lo + Fraction(rng.randrange(int((hi - lo) * den) + 1), den)

    paths = {v: simple_paths(network, v, network.sink) for v in network.nodes}
    for _ in range(samples):
        v = rng.choice(network.nodes)
        theta = rand_time()
        for path in paths[v]:
            waits = [ZERO] * len(path)
            if rng.random() < 0.5 and path:
                waits = [Fraction(rng.randrange(0, 9), 4) for _ in path]
            got = trip_cost(path, theta, waits, cost, tolls)
            rep.checked += 1
            if got < C - cert[v](theta):
                rep.failures.append({"node": str(v), "theta": fmt(theta), "path": [a.id for a in path],
                                     "cost": fmt(got), "bound": fmt(C - cert[v](theta))})
    # used routes from the source pay exactly C
    s = network.source
    for path in paths[s]:
        for _ in range(max(1, samples // max(1, len(paths[s])))):
            theta = rand_time()
            t, used = theta, True
            for a in path:
                if flow.rate(a.id, t) <= 0:
                    used = False
                    break
                t += a.delay
            if not used:
                continue
            got = trip_cost(path, theta, [ZERO] * len(path), cost, tolls)
            rep.tight += 1
            if got != C:
                rep.failures.append({"node": str(s), "theta": fmt(theta), "path": [a.id for a in path],
                                     "cost": fmt(got), "expected": fmt(C)})
    return rep


def mutate_potential(cert: DualCertificate, v, cell: int, eps) -> DualCertificate:
    """Copy of ``cert`` with ``eps`` added to ``pi_v`` on one cell (and its end points)."""
    pi = cert[v]
    eps = q(eps)
    cells = list(pi.cells)
    s, c = cells[cell]
    cells[cell] = (s, c + eps)
    points = list(pi.points)
    for k in (cell - 1, cell):
        if 0 <= k < len(points):
            points[k] = points[k] + eps
    pots = dict(cert.potentials)
    pots[v] = PiecewiseLinear(pi.breaks, cells, points)
    return DualCertificate(cert.network, cert.cost, cert.horizon, pots, cert.j_steps)


__all__ = [
    "DualCertificate", "TollSchedule", "CertificateReport", "EquilibriumReport", "build_potentials", "build_tolls",
    "potential_gap", "stage_potential", "verify_certificate", "duality_gap", "certify", "equilibrium_check",
    "simple_paths", "trip_cost", "mutate_potential", "tight_mutant",
]


def tight_mutant(flow: FlowOverTime, cert: DualCertificate, rng: random.Random, eps=Fraction(1, 1000)) -> DualCertificate:
    """Perturb one potential piece that complementary slackness pins down.

    Picks an arc cell where the potential gap is 0 and the flow leaves room
    on one side, then shifts the tail potential on the piece under that cell
    in the direction that breaks the gap condition. Raises LookupError when
    no such cell exists.
    """
    network = flow.network
    s = network.source
    choices = []
    for a in network.arcs:
        if a.tail == s:
            continue
        pi = cert[a.tail]
        f, g, p = PiecewiseLinear._common([flow.rates[a.id], potential_gap(cert, a), pi])
        bounds = p.cell_bounds()
        for k, ((lo, hi), (_, fc), (gs, gc)) in enumerate(zip(bounds, f.cells, g.cells)):
            if is_inf(gc):
                continue
            theta = _probe(lo, hi)
            if gs * theta + gc != 0:
                continue
            if fc > 0:
                choices.append((a.tail, theta, q(eps)))
            if fc < a.capacity:
                choices.append((a.tail, theta, -q(eps)))
    if not choices:
        raise LookupError("no tight potential piece")
    v, theta, delta = rng.choice(choices)
    pi = cert[v]
    if theta in pi.breaks:
        raise InvariantError("probe landed on a breakpoint")
    return mutate_potential(cert, v, pi._cell_index(theta), delta)
