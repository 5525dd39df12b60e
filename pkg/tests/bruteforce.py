"""Definition-level brute-force oracles for small graphs.

These deliberately avoid the algorithms used by the package (no BFS/DFS
reachability, no augmenting paths, no Kahn peeling): reachability comes
from transitive closure, cycles from matrix powers / forest counting,
flows from min-cut enumeration, and matching from exhaustive injective
mappings.  Only usable for graphs of a handful of nodes.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from grraf.graphs import PropertyGraph


def _closure(g: PropertyGraph) -> list[list[bool]]:
    n = g.node_count
    reach = [[False] * n for _ in range(n)]
    for v in range(n):
        reach[v][v] = True
    for e in g.edges:
        reach[e.u][e.v] = True
        if not g.directed:
            reach[e.v][e.u] = True
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                row_k = reach[k]
                row_i = reach[i]
                for j in range(n):
                    if row_k[j]:
                        row_i[j] = True
    return reach


def bf_connected(g: PropertyGraph, u: int, v: int) -> bool:
    return _closure(g)[u][v]


def bf_cycle(g: PropertyGraph) -> bool:
    n = g.node_count
    if g.directed:
        # A directed cycle exists iff some edge u->v closes back (v reaches
        # u through the transitive closure, including v == u).
        reach = _closure(g)
        return any(reach[e.v][e.u] for e in g.edges)
    # Undirected: some component has >= as many non-loop edges as nodes.
    reach = _closure(g)
    for comp_nodes in _components(reach):
        edge_count = sum(
            1 for e in g.edges if e.u != e.v and e.u in comp_nodes
        )
        if edge_count >= len(comp_nodes):
            return True
    return False


def _components(reach: list[list[bool]]) -> list[set[int]]:
    n = len(reach)
    seen: set[int] = set()
    comps = []
    for v in range(n):
        if v in seen:
            continue
        # undirected closure is symmetric, so rows are plain components
        comp = {u for u in range(n) if reach[v][u]}
        seen |= comp
        comps.append(comp)
    return comps


def bf_bipartite(g: PropertyGraph) -> bool:
    n = g.node_count
    pairs = [(e.u, e.v) for e in g.edges]
    for coloring in itertools.product((0, 1), repeat=n):
        if all(coloring[u] != coloring[v] for u, v in pairs):
            return True
    return not pairs or n == 0


def bf_shortest_cost(g: PropertyGraph, src: int, dst: int) -> Fraction | None:
    n = g.node_count
    inf = None
    dist: list[list[Fraction | None]] = [[inf] * n for _ in range(n)]
    for v in range(n):
        dist[v][v] = Fraction(0)
    for e in g.edges:
        w = Fraction(1) if e.weight is None else e.weight
        if dist[e.u][e.v] is None or w < dist[e.u][e.v]:
            dist[e.u][e.v] = w
        if not g.directed and (dist[e.v][e.u] is None or w < dist[e.v][e.u]):
            dist[e.v][e.u] = w
    for k in range(n):
        for i in range(n):
            if dist[i][k] is None:
                continue
            for j in range(n):
                if dist[k][j] is None:
                    continue
                cand = dist[i][k] + dist[k][j]
                if dist[i][j] is None or cand < dist[i][j]:
                    dist[i][j] = cand
    return dist[src][dst]


def bf_max_flow(g: PropertyGraph, s: int, t: int) -> Fraction:
    """Max-flow value as the minimum s-t cut over all node partitions."""
    n = g.node_count
    others = [v for v in range(n) if v not in (s, t)]
    best: Fraction | None = None
    for r in range(len(others) + 1):
        for extra in itertools.combinations(others, r):
            side = {s, *extra}
            cut = Fraction(0)
            for e in g.edges:
                if e.u in side and e.v not in side:
                    cut += e.capacity if e.capacity is not None else Fraction(0)
            if best is None or cut < best:
                best = cut
    return best if best is not None else Fraction(0)


def bf_triangle_sum(g: PropertyGraph) -> Fraction | None:
    adjacent = set()
    for e in g.edges:
        if e.u != e.v:
            adjacent.add((e.u, e.v))
            adjacent.add((e.v, e.u))
    best = None
    for a, b, c in itertools.combinations(range(g.node_count), 3):
        if (a, b) in adjacent and (b, c) in adjacent and (a, c) in adjacent:
            total = g.node_weights[a] + g.node_weights[b] + g.node_weights[c]
            if best is None or total > best:
                best = total
    return best


def bf_subgraph(g: PropertyGraph, pattern: PropertyGraph) -> bool:
    if pattern.node_count == 0:
        return True
    if pattern.node_count > g.node_count:
        return False
    p_edges = [(e.u, e.v) for e in pattern.edges]
    g_has = set()
    for e in g.edges:
        g_has.add((e.u, e.v))
        if not g.directed:
            g_has.add((e.v, e.u))
    for assignment in itertools.permutations(range(g.node_count), pattern.node_count):
        ok = True
        for u, v in p_edges:
            gu, gv = assignment[u], assignment[v]
            if (gu, gv) not in g_has and (
                g.directed or (gv, gu) not in g_has
            ):
                ok = False
                break
        if ok:
            return True
    return False


def bf_indegree(g: PropertyGraph, v: int) -> int:
    return sum(1 for e in g.edges if e.v == v)


def bf_outdegree(g: PropertyGraph, v: int) -> int:
    return sum(1 for e in g.edges if e.u == v)


def bf_topo_is_valid(g: PropertyGraph, order: list[int]) -> bool:
    if sorted(order) != list(range(g.node_count)):
        return False
    pos = {v: i for i, v in enumerate(order)}
    return all(pos[e.u] < pos[e.v] for e in g.edges)
