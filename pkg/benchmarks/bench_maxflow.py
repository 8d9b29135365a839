#!/usr/bin/env python3
"""Benchmark the compiled vs pure-Python max-flow kernel.

The Dinic kernel is the only hand-written hot loop in the package; this
script times both execution paths on random porous grids and on a dense
open block, and prints the speedup.  Run as::

    python3 benchmarks/bench_maxflow.py [--size 40] [--repeats 3]

The compiled path requires numba; without it only the fallback is timed.
"""

import argparse
import time

import numpy as np

from rockperm import _accel, _dinic, poregraph
from rockperm.voxel import VoxelGrid, morph


def build_cases(size, seed):
    rng = np.random.default_rng(seed)
    cases = {}
    porous = VoxelGrid(rng.random((size, size, size)) < 0.35)
    cases["porous"] = poregraph.build_graph(morph(porous, 1), "x")
    cases["open block"] = poregraph.build_graph(
        VoxelGrid(np.ones((size, size, size), dtype=bool)), "x"
    )
    return cases


def time_kernel(kernel, graph, repeats):
    ptr, adj, arc_to, cap0 = _dinic.build_arcs(graph.node_count, graph.edges)
    best = np.inf
    flow = None
    for _ in range(repeats):
        cap = cap0.copy()
        t0 = time.perf_counter()
        flow = kernel(ptr, adj, arc_to, cap, graph.source, graph.sink)
        best = min(best, time.perf_counter() - t0)
    return flow, best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=40)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print(f"numba available: {_accel.NUMBA_ENABLED}")
    for name, graph in build_cases(args.size, args.seed).items():
        print(
            f"\n{name}: {graph.node_count} nodes, "
            f"{graph.edges.shape[0]} edges"
        )
        flow_py, t_py = time_kernel(
            _dinic._dinic_kernel, graph, args.repeats
        )
        print(f"  pure python: flow={flow_py}  best of {args.repeats}: {t_py:.3f} s")
        if _accel.NUMBA_ENABLED:
            # warm up compilation outside the timed region
            time_kernel(_dinic.dinic_kernel, graph, 1)
            flow_nb, t_nb = time_kernel(
                _dinic.dinic_kernel, graph, args.repeats
            )
            assert flow_nb == flow_py, "kernel results disagree"
            print(
                f"  numba:       flow={flow_nb}  best of {args.repeats}: "
                f"{t_nb:.3f} s  (speedup {t_py / t_nb:.1f}x)"
            )


if __name__ == "__main__":
    main()
