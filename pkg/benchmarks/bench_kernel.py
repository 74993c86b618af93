"""Compare the compiled and pure-Python min-cost flow kernels on time-expanded graphs.

Usage: python benchmarks/bench_kernel.py [--instances N] [--delta 1/4]
"""

from __future__ import annotations

import argparse
import time
from fractions import Fraction

from schedflow import kernel
from schedflow.assembler import solve
from schedflow.corpus import corpus
from schedflow.oracle import default_window, discrete_solve, expand


def build_graphs(count: int, delta: Fraction):
    out = []
    for inst in corpus(count):
        sol = solve(inst.network, inst.cost, horizon=inst.horizon)
        lo, hi = default_window(sol)
        out.append((expand(inst.network, inst.cost, delta, (lo, hi - delta)), sol.demand))
    return out


def run(graphs, backend: str) -> tuple[float, list]:
    start = time.perf_counter()
    costs = [discrete_solve(g, d, backend=backend).cost for g, d in graphs]
    return time.perf_counter() - start, costs


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--instances", type=int, default=40)
    p.add_argument("--delta", default="1/4")
    args = p.parse_args(argv)
    graphs = build_graphs(args.instances, Fraction(args.delta))
    nodes = sum(len(g.nodes) for g, _ in graphs)
    arcs = sum(len(g.arcs) for g, _ in graphs)
    print(f"{len(graphs)} expanded graphs, {nodes} nodes, {arcs} arcs in total")
    py_time, py_costs = run(graphs, "python")
    print(f"python    {py_time:8.3f} s")
    if kernel.BACKEND != "compiled":
        print("compiled  unavailable (extension not built)")
        return 0
    c_time, c_costs = run(graphs, "compiled")
    print(f"compiled  {c_time:8.3f} s   speedup x{py_time / c_time:.1f}")
    if c_costs != py_costs:
        print("MISMATCH between backends")
        return 1
    print("costs identical across backends")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
