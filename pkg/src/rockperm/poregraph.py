"""Unit-capacity graph representation of the pore space.

Every fluid voxel is a node, every shared face between fluid voxels an
undirected edge of capacity one.  Two super-nodes are added: the source
connects to all fluid voxels on the inflow face (axis = 0), the sink to
all fluid voxels on the outflow face (axis = max).  The max-flow value of
this graph is the connectivity feature fed to the permeability baseline
and the CNN.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _dinic
from .voxel import AXES, VoxelGrid


@dataclass(frozen=True)
class PoreGraph:
    node_count: int  # fluid voxels + 2 super-nodes
    edges: np.ndarray  # (E, 2) int64, undirected, capacity 1 each
    source: int
    sink: int
    axis: str


def build_graph(grid: VoxelGrid, axis: str = "x") -> PoreGraph:
    """Build the unit-capacity pore graph for flow along ``axis``."""
    data = np.moveaxis(grid.data, AXES[axis], 0)
    nfluid = int(data.sum())
    ids = np.full(data.shape, -1, dtype=np.int64)
    ids[data] = np.arange(nfluid)
    chunks = []
    for ax in range(3):
        a = np.swapaxes(data, 0, ax)
        i = np.swapaxes(ids, 0, ax)
        pair = a[:-1] & a[1:]
        chunks.append(np.stack([i[:-1][pair], i[1:][pair]], axis=1))
    source = nfluid
    sink = nfluid + 1
    inflow = ids[0][data[0]]
    outflow = ids[-1][data[-1]]
    chunks.append(np.stack([np.full(inflow.size, source, dtype=np.int64), inflow], axis=1))
    chunks.append(np.stack([np.full(outflow.size, sink, dtype=np.int64), outflow], axis=1))
    edges = (
        np.concatenate(chunks, axis=0)
        if chunks
        else np.empty((0, 2), dtype=np.int64)
    )
    return PoreGraph(nfluid + 2, edges, source, sink, axis)


def max_flow(graph: PoreGraph) -> int:
    """Exact integer maximum flow between the super-nodes."""
    if graph.edges.shape[0] == 0:
        return 0
    flow, _, _, _, _ = _dinic.max_flow_arcs(
        graph.node_count, graph.edges, graph.source, graph.sink
    )
    return int(flow)


def min_cut(graph: PoreGraph):
    """A minimum edge cut separating source from sink.

    Returns a list of (u, v) node-id pairs; its size equals the maximum
    flow, and removing these edges disconnects source from sink.
    """
    if graph.edges.shape[0] == 0:
        return []
    flow, cap, arc_to, ptr, adj = _dinic.max_flow_arcs(
        graph.node_count, graph.edges, graph.source, graph.sink
    )
    if flow == 0:
        return []
    reach = _dinic.residual_reachable(
        graph.node_count, ptr, adj, arc_to, cap, graph.source
    )
    u, v = graph.edges[:, 0], graph.edges[:, 1]
    crossing = reach[u] != reach[v]
    cut = [tuple(e) for e in graph.edges[crossing]]
    assert len(cut) == flow, "min-cut size must equal max flow"
    return cut


def export_edge_list(graph: PoreGraph, path) -> None:
    """Write one 'source_id target_id' line per edge for external tools."""
    np.savetxt(path, graph.edges, fmt="%d")
