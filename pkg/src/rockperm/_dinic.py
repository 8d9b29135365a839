"""Dinic's algorithm on undirected unit-capacity graphs.

Each undirected edge is realized as a pair of antiparallel arcs of
capacity 1; arc ``a`` and its reverse ``a ^ 1`` share storage in the
capacity array.  The kernel runs under numba when available (see
``rockperm._accel``); the same function body is the pure-Python fallback.
"""

import numpy as np

from ._accel import maybe_njit


def build_arcs(node_count, edges):
    """CSR adjacency over the 2*E arc list of an undirected edge array.

    Returns (ptr, adj, arc_to, cap): node u's outgoing arcs are
    ``adj[ptr[u]:ptr[u+1]]``; ``arc_to[a]`` is the head of arc ``a``;
    arc ``2*i`` runs edges[i,0] -> edges[i,1], arc ``2*i+1`` the reverse.
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    e = edges.shape[0]
    arc_from = np.empty(2 * e, dtype=np.int64)
    arc_to = np.empty(2 * e, dtype=np.int64)
    arc_from[0::2] = edges[:, 0]
    arc_to[0::2] = edges[:, 1]
    arc_from[1::2] = edges[:, 1]
    arc_to[1::2] = edges[:, 0]
    order = np.argsort(arc_from, kind="stable")
    adj = order
    ptr = np.zeros(node_count + 1, dtype=np.int64)
    np.add.at(ptr, arc_from + 1, 1)
    ptr = np.cumsum(ptr)
    cap = np.ones(2 * e, dtype=np.int64)
    return ptr, adj, arc_to, cap


def _dinic_kernel(ptr, adj, arc_to, cap, source, sink):
    n = ptr.shape[0] - 1
    level = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    it = np.empty(n, dtype=np.int64)
    path_node = np.empty(n + 1, dtype=np.int64)
    path_arc = np.empty(n + 1, dtype=np.int64)
    flow = 0
    while True:
        # BFS level graph on the residual network
        for u in range(n):
            level[u] = -1
        level[source] = 0
        queue[0] = source
        head, tail = 0, 1
        while head < tail:
            u = queue[head]
            head += 1
            for i in range(ptr[u], ptr[u + 1]):
                a = adj[i]
                v = arc_to[a]
                if cap[a] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue[tail] = v
                    tail += 1
        if level[sink] < 0:
            return flow
        # blocking flow by iterative DFS with current-arc pointers
        for u in range(n):
            it[u] = ptr[u]
        top = 0
        path_node[0] = source
        while True:
            u = path_node[top]
            if u == sink:
                aug = cap[path_arc[1]]
                for d in range(2, top + 1):
                    if cap[path_arc[d]] < aug:
                        aug = cap[path_arc[d]]
                for d in range(1, top + 1):
                    a = path_arc[d]
                    cap[a] -= aug
                    cap[a ^ 1] += aug
                flow += aug
                d = 1
                while d <= top and cap[path_arc[d]] > 0:
                    d += 1
                top = d - 1
                continue
            advanced = False
            while it[u] < ptr[u + 1]:
                a = adj[it[u]]
                v = arc_to[a]
                if cap[a] > 0 and level[v] == level[u] + 1:
                    top += 1
                    path_node[top] = v
                    path_arc[top] = a
                    advanced = True
                    break
                it[u] += 1
            if not advanced:
                level[u] = -1
                if top == 0:
                    break
                top -= 1
                it[path_node[top]] += 1


dinic_kernel = maybe_njit(_dinic_kernel)


def max_flow_arcs(node_count, edges, source, sink):
    """Run Dinic and return (flow, residual cap array, arc_to, ptr, adj)."""
    ptr, adj, arc_to, cap = build_arcs(node_count, edges)
    flow = dinic_kernel(ptr, adj, arc_to, cap, source, sink)
    return flow, cap, arc_to, ptr, adj


def residual_reachable(node_count, ptr, adj, arc_to, cap, source):
    """Nodes reachable from the source in the residual network."""
    seen = np.zeros(node_count, dtype=bool)
    seen[source] = True
    stack = [source]
    while stack:
        u = stack.pop()
        for i in range(ptr[u], ptr[u + 1]):
            a = adj[i]
            v = arc_to[a]
            if cap[a] > 0 and not seen[v]:
                seen[v] = True
                stack.append(v)
    return seen
