"""Seeded random desk-scale instances for regression and acceptance runs."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .network import Network
from .rational import fmt
from .scheduling import SchedulingCost, make_standard_cost
from .ssp import successive_shortest_paths

BETAS = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))
GAMMAS = (Fraction(3, 2), Fraction(2), Fraction(3))


@dataclass(frozen=True)
class CorpusInstance:
    seed: int
    network: Network
    cost: SchedulingCost
    horizon: Fraction
    beta: Fraction
    gamma: Fraction

    def to_json(self) -> dict:
        """Instance file body, readable by :func:`schedflow.files.parse_instance`."""
        net = self.network
        return {
            "network": {
                "nodes": list(net.nodes),
                "arcs": [{"id": a.id, "tail": a.tail, "head": a.head, "capacity": fmt(a.capacity), "delay": fmt(a.delay)}
                         for a in net.arcs],
                "source": net.source,
                "sink": net.sink,
            },
            "cost": {"alpha": fmt(self.cost.alpha), "preset": "standard", "beta": fmt(self.beta), "gamma": fmt(self.gamma)},
            "target": {"horizon": fmt(self.horizon)},
        }


def _reachable(nodes, arcs, s, t) -> bool:
    seen, stack = {s}, [s]
    while stack:
        v = stack.pop()
        for _, a, b, cap, _ in arcs:
            if a == v and cap > 0 and b not in seen:
                seen.add(b)
                stack.append(b)
    return t in seen


def random_network(rng: random.Random, max_nodes: int = 6, max_arcs: int = 10) -> Network:
    while True:
        n = rng.randint(2, max_nodes)
        nodes = [f"v{i}" for i in range(n)]
        s, t = nodes[0], nodes[-1]
        m = rng.randint(1, max_arcs)
        arcs = []
        for k in range(m):
            a, b = rng.sample(nodes, 2)
            arcs.append((f"e{k}", a, b, rng.randint(1, 5), rng.randint(0, 5)))
        if _reachable(nodes, arcs, s, t):
            return Network.build(nodes, arcs, s, t)


def random_instance(seed: int) -> CorpusInstance:
    """Network, standard cost (alpha = 1) and a cost horizon that activates some paths."""
    rng = random.Random(seed)
    net = random_network(rng)
    beta, gamma = rng.choice(BETAS), rng.choice(GAMMAS)
    cost = make_standard_cost(1, beta, gamma)
    decomp = successive_shortest_paths(net)
    longest = max(decomp.path_delay(j) for j in range(1, decomp.m + 1))
    horizon = Fraction(rng.randint(1, 4 * int(longest + 3)), rng.choice((1, 2, 4)))
    return CorpusInstance(seed, net, cost, horizon, beta, gamma)


def corpus(count: int = 200, base_seed: int = 0) -> list[CorpusInstance]:
    return [random_instance(base_seed + k) for k in range(count)]
