"""Exact reference algorithms and answer checkers for the ten graph tasks.

All oracles are pure functions over immutable :class:`PropertyGraph`
instances and are safe to call concurrently.  Contract violations
(wrong directedness, bad node ids, missing required properties) raise
``ValueError``; they are never encoded in return values.
"""

from __future__ import annotations

import heapq
import time
from collections import deque
from enum import Enum
from fractions import Fraction
from typing import Any, Mapping, Sequence

from .graphs import PropertyGraph


class TaskKind(str, Enum):
    CYCLE_DETECTION = "cycle_detection"
    CONNECTIVITY = "connectivity"
    BIPARTITE_CHECK = "bipartite_check"
    TOPOLOGICAL_SORT = "topological_sort"
    SHORTEST_PATH = "shortest_path"
    MAX_TRIANGLE_SUM = "max_triangle_sum"
    MAX_FLOW = "max_flow"
    SUBGRAPH_MATCHING = "subgraph_matching"
    INDEGREE = "indegree"
    OUTDEGREE = "outdegree"


#: Tasks whose reference algorithm runs in polynomial time.
POLYNOMIAL_TASKS = tuple(t for t in TaskKind if t is not TaskKind.SUBGRAPH_MATCHING)

#: Tasks that require a directed input graph.
DIRECTED_TASKS = frozenset(
    {
        TaskKind.TOPOLOGICAL_SORT,
        TaskKind.MAX_FLOW,
        TaskKind.INDEGREE,
        TaskKind.OUTDEGREE,
    }
)


def _simplify(x: Fraction) -> int | Fraction:
    return x.numerator if x.denominator == 1 else x


def _edge_weight_or_one(g: PropertyGraph, u: int, v: int) -> int | Fraction:
    e = g.edge_between(u, v)
    if e is None:
        raise ValueError(f"no edge between {u} and {v}")
    return 1 if e.weight is None else _simplify(e.weight)


# -- boolean tasks -----------------------------------------------------------

def detect_cycle(g: PropertyGraph) -> bool:
    """True iff the graph contains a cycle.

    Directed graphs: any directed cycle (a self-loop counts).  Undirected
    graphs: any simple cycle of length >= 3; a single edge or self-loop
    is not a cycle.
    """
    if g.directed:
        # Kahn's algorithm: leftover nodes lie on or downstream of a cycle.
        indeg = [0] * g.node_count
        for e in g.edges:
            indeg[e.v] += 1
        queue = deque(v for v in range(g.node_count) if indeg[v] == 0)
        seen = 0
        while queue:
            u = queue.popleft()
            seen += 1
            for v in g.neighbors(u):
                indeg[v] -= 1
                if indeg[v] == 0:
                    queue.append(v)
        return seen != g.node_count
    # Undirected: a component with as many non-loop edges as nodes has a
    # cycle, and with no parallel edges that cycle has length >= 3.
    parent = list(range(g.node_count))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in g.edges:
        if e.u == e.v:
            continue
        ru, rv = find(e.u), find(e.v)
        if ru == rv:
            return True
        parent[ru] = rv
    return False


def is_connected(g: PropertyGraph, u: int, v: int) -> bool:
    """True iff a path u -> v exists (directed edges traversed forward)."""
    g.check_node(u)
    g.check_node(v)
    if u == v:
        return True
    seen = {u}
    queue = deque([u])
    while queue:
        x = queue.popleft()
        for y in g.neighbors(x):
            if y == v:
                return True
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return False


def is_bipartite(g: PropertyGraph) -> bool:
    """True iff the nodes are 2-colorable with no monochromatic edge.

    Edge direction is ignored; a self-loop makes the graph non-bipartite.
    """
    if g.has_self_loops:
        return False
    color = [-1] * g.node_count
    undirected = [set() for _ in range(g.node_count)]
    for e in g.edges:
        undirected[e.u].add(e.v)
        undirected[e.v].add(e.u)
    for start in range(g.node_count):
        if color[start] != -1:
            continue
        color[start] = 0
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y in undirected[x]:
                if color[y] == -1:
                    color[y] = 1 - color[x]
                    queue.append(y)
                elif color[y] == color[x]:
                    return False
    return True


# -- ordering and path tasks -------------------------------------------------

def topological_sort(g: PropertyGraph) -> list[int] | None:
    """A topological order of a directed graph, or None if it has a cycle.

    Deterministic: among ready nodes the smallest id is emitted first.
    """
    if not g.directed:
        raise ValueError("topological sort requires a directed graph")
    indeg = [0] * g.node_count
    for e in g.edges:
        indeg[e.v] += 1
    ready = [v for v in range(g.node_count) if indeg[v] == 0]
    heapq.heapify(ready)
    order: list[int] = []
    while ready:
        u = heapq.heappop(ready)
        order.append(u)
        for v in g.neighbors(u):
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(ready, v)
    if len(order) != g.node_count:
        return None
    return order


def shortest_path(
    g: PropertyGraph, src: int, dst: int
) -> tuple[list[int], int | Fraction] | None:
    """Minimum-weight src -> dst path and its total weight, or None.

    Edges without a weight count as 1.  Negative weights are a contract
    violation.  Ties are broken toward smaller predecessor ids, so the
    result is deterministic.
    """
    g.check_node(src)
    g.check_node(dst)
    for e in g.edges:
        if e.weight is not None and e.weight < 0:
            raise ValueError(f"negative edge weight on ({e.u},{e.v})")
    if src == dst:
        return [src], 0
    dist: dict[int, int | Fraction] = {src: 0}
    pred: dict[int, int] = {}
    heap: list[tuple] = [(0, src)]
    done: set[int] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        if u == dst:
            break
        done.add(u)
        for v in g.neighbors(u):
            nd = d + _edge_weight_or_one(g, u, v)
            old = dist.get(v)
            if old is None or nd < old or (nd == old and u < pred[v]):
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    if dst not in dist:
        return None
    path = [dst]
    while path[-1] != src:
        path.append(pred[path[-1]])
    path.reverse()
    return path, _simplify(Fraction(dist[dst]))


def max_triangle_sum(g: PropertyGraph) -> int | Fraction | None:
    """Maximum node-weight sum over mutually adjacent triples, or None.

    Adjacency ignores edge direction; self-loops do not create triangles.
    Every node must carry a weight.
    """
    missing = [i for i, w in enumerate(g.node_weights) if w is None]
    if missing:
        raise ValueError(f"nodes without weights: {missing[:5]}")
    adj = [set() for _ in range(g.node_count)]
    for e in g.edges:
        if e.u != e.v:
            adj[e.u].add(e.v)
            adj[e.v].add(e.u)
    best: Fraction | None = None
    for e in g.edges:
        if e.u == e.v:
            continue
        for w in adj[e.u] & adj[e.v]:
            if w == e.u or w == e.v:
                continue
            total = g.node_weights[e.u] + g.node_weights[e.v] + g.node_weights[w]
            if best is None or total > best:
                best = total
    return None if best is None else _simplify(best)


# -- flow --------------------------------------------------------------------

def max_flow(g: PropertyGraph, s: int, t: int) -> int | Fraction:
    """Value of a maximum s -> t flow via shortest augmenting paths.

    The search runs on the full residual graph, so augmenting paths may
    traverse backward residual edges and reroute earlier flow.
    """
    if not g.directed:
        raise ValueError("max flow requires a directed graph")
    g.check_node(s)
    g.check_node(t)
    if s == t:
        raise ValueError("source and sink must differ")
    residual: list[dict[int, Fraction]] = [dict() for _ in range(g.node_count)]
    for e in g.edges:
        cap = e.capacity if e.capacity is not None else Fraction(0)
        residual[e.u][e.v] = residual[e.u].get(e.v, Fraction(0)) + cap
        residual[e.v].setdefault(e.u, Fraction(0))
    total = Fraction(0)
    while True:
        pred: dict[int, int] = {s: s}
        queue = deque([s])
        while queue and t not in pred:
            u = queue.popleft()
            for v, cap in residual[u].items():
                if cap > 0 and v not in pred:
                    pred[v] = u
                    queue.append(v)
        if t not in pred:
            return _simplify(total)
        bottleneck = None
        v = t
        while v != s:
            u = pred[v]
            cap = residual[u][v]
            if bottleneck is None or cap < bottleneck:
                bottleneck = cap
            v = u
        v = t
        while v != s:
            u = pred[v]
            residual[u][v] -= bottleneck
            residual[v][u] += bottleneck
            v = u
        total += bottleneck


def max_flow_no_residual_reference(g: PropertyGraph, s: int, t: int) -> int | Fraction:
    """Deliberately unsound greedy flow: forward capacities only.

    Augments along depth-first paths (ascending neighbor ids) without
    ever adding backward residual edges, so earlier flow can never be
    rerouted.  Kept as a permanent regression reference; never use it
    as a ground-truth oracle.
    """
    if not g.directed:
        raise ValueError("max flow requires a directed graph")
    g.check_node(s)
    g.check_node(t)
    if s == t:
        raise ValueError("source and sink must differ")
    remaining: dict[tuple[int, int], Fraction] = {}
    for e in g.edges:
        cap = e.capacity if e.capacity is not None else Fraction(0)
        remaining[(e.u, e.v)] = remaining.get((e.u, e.v), Fraction(0)) + cap

    def find_path() -> list[int] | None:
        # true DFS order: ascending neighbor ids, visited marked on entry
        visited = {s}
        path = [s]
        stack = [iter(g.neighbors(s))]
        while stack:
            advanced = False
            for v in stack[-1]:
                if v in visited or remaining.get((path[-1], v), Fraction(0)) <= 0:
                    continue
                visited.add(v)
                path.append(v)
                if v == t:
                    return path
                stack.append(iter(g.neighbors(v)))
                advanced = True
                break
            if not advanced:
                stack.pop()
                path.pop()
        return None

    total = Fraction(0)
    while True:
        path = find_path()
        if path is None:
            return _simplify(total)
        bottleneck = min(remaining[(u, v)] for u, v in zip(path, path[1:]))
        for u, v in zip(path, path[1:]):
            remaining[(u, v)] -= bottleneck
        total += bottleneck


# -- subgraph matching ---------------------------------------------------------

def subgraph_match(
    g: PropertyGraph,
    pattern: PropertyGraph,
    budget_s: float | None = None,
    induced: bool = False,
) -> bool | None:
    """True iff an injective node mapping embeds ``pattern`` into ``g``.

    Non-induced by default: every pattern adjacency must be preserved,
    extra edges in ``g`` are fine.  With ``induced=True`` non-adjacency
    must be preserved as well.  Returns ``None`` when the optional time
    budget expires before a verdict.
    """
    if pattern.directed != g.directed:
        raise ValueError("pattern and target must share directedness")
    if pattern.node_count == 0:
        return True
    if pattern.node_count > g.node_count:
        return False

    deadline = None if budget_s is None else time.monotonic() + budget_s

    p_out = [set(pattern.neighbors(v)) for v in range(pattern.node_count)]
    p_in = [set(pattern.in_neighbors(v)) for v in range(pattern.node_count)]
    g_out = [set(g.neighbors(v)) for v in range(g.node_count)]
    g_in = [set(g.in_neighbors(v)) for v in range(g.node_count)]

    def degree(v: int, adjacency) -> int:
        return len(adjacency[v])

    # Order pattern nodes by descending degree, preferring nodes adjacent
    # to already-placed ones so partial mappings are constrained early.
    order: list[int] = []
    placed: set[int] = set()
    remaining = set(range(pattern.node_count))
    while remaining:
        connected = {
            v
            for v in remaining
            if any(u in placed for u in (p_out[v] | p_in[v]))
        }
        pool = connected or remaining
        nxt = max(pool, key=lambda v: (len(p_out[v]) + len(p_in[v]), -v))
        order.append(nxt)
        placed.add(nxt)
        remaining.discard(nxt)

    mapping: dict[int, int] = {}
    used: set[int] = set()
    ticks = 0

    def feasible(pv: int, gv: int) -> bool:
        if len(p_out[pv]) > len(g_out[gv]) or len(p_in[pv]) > len(g_in[gv]):
            return False
        if pv in p_out[pv] and gv not in g_out[gv]:
            return False
        for pu in p_out[pv]:
            if pu in mapping and mapping[pu] not in g_out[gv]:
                return False
        for pu in p_in[pv]:
            if pu in mapping and mapping[pu] not in g_in[gv]:
                return False
        if induced:
            for pu, gu in mapping.items():
                if pu not in p_out[pv] and gu in g_out[gv] and pu != pv:
                    return False
                if pu not in p_in[pv] and gu in g_in[gv] and pu != pv:
                    return False
        return True

    def backtrack(depth: int) -> bool | None:
        nonlocal ticks
        if depth == len(order):
            return True
        ticks += 1
        if deadline is not None and ticks % 64 == 0 and time.monotonic() > deadline:
            return None
        pv = order[depth]
        for gv in range(g.node_count):
            if gv in used or not feasible(pv, gv):
                continue
            mapping[pv] = gv
            used.add(gv)
            verdict = backtrack(depth + 1)
            if verdict:
                return True
            del mapping[pv]
            used.discard(gv)
            if verdict is None:
                return None
        return False

    return backtrack(0)


# -- degrees -------------------------------------------------------------------

def indegree(g: PropertyGraph, v: int) -> int:
    """Count of edges entering v; a self-loop counts once."""
    if not g.directed:
        raise ValueError("indegree requires a directed graph")
    return len(g.in_neighbors(v))


def outdegree(g: PropertyGraph, v: int) -> int:
    """Count of edges leaving v; a self-loop counts once."""
    if not g.directed:
        raise ValueError("outdegree requires a directed graph")
    return len(g.neighbors(v))


# -- answer model ----------------------------------------------------------------

_BOOLEAN_TASKS = frozenset(
    {TaskKind.CYCLE_DETECTION, TaskKind.CONNECTIVITY,
     TaskKind.BIPARTITE_CHECK, TaskKind.SUBGRAPH_MATCHING}
)
_INTEGER_TASKS = frozenset({TaskKind.INDEGREE, TaskKind.OUTDEGREE})
_RATIONAL_TASKS = frozenset({TaskKind.MAX_FLOW, TaskKind.MAX_TRIANGLE_SUM})


def solve(task: TaskKind, g: PropertyGraph, params: Mapping[str, Any]) -> Any:
    """Run the reference oracle for ``task`` and return its answer value."""
    if task is TaskKind.CYCLE_DETECTION:
        return detect_cycle(g)
    if task is TaskKind.CONNECTIVITY:
        return is_connected(g, params["u"], params["v"])
    if task is TaskKind.BIPARTITE_CHECK:
        return is_bipartite(g)
    if task is TaskKind.TOPOLOGICAL_SORT:
        return topological_sort(g)
    if task is TaskKind.SHORTEST_PATH:
        return shortest_path(g, params["src"], params["dst"])
    if task is TaskKind.MAX_TRIANGLE_SUM:
        return max_triangle_sum(g)
    if task is TaskKind.MAX_FLOW:
        return max_flow(g, params["s"], params["t"])
    if task is TaskKind.SUBGRAPH_MATCHING:
        return subgraph_match(g, params["pattern"], params.get("budget_s"))
    if task is TaskKind.INDEGREE:
        return indegree(g, params["v"])
    if task is TaskKind.OUTDEGREE:
        return outdegree(g, params["v"])
    raise ValueError(f"unknown task {task!r}")


def _coerce_rational(x: Any) -> Fraction | None:
    if isinstance(x, bool):
        return None
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(str(x))
    return None


def _coerce_node_seq(x: Any) -> list[int] | None:
    if isinstance(x, (list, tuple)):
        out = []
        for item in x:
            if isinstance(item, bool) or not isinstance(item, int):
                return None
            out.append(item)
        return out
    return None


def _path_is_valid(g: PropertyGraph, path: Sequence[int], src: int, dst: int) -> bool:
    if not path or path[0] != src or path[-1] != dst:
        return False
    for v in path:
        if not 0 <= v < g.node_count:
            return False
    for u, v in zip(path, path[1:]):
        e = g.edge_between(u, v)
        if e is None:
            return False
        if g.directed and e.u != u:
            return False
    return True


def _path_cost(g: PropertyGraph, path: Sequence[int]) -> Fraction:
    total = Fraction(0)
    for u, v in zip(path, path[1:]):
        total += Fraction(_edge_weight_or_one(g, u, v))
    return total


def check_answer(
    task: TaskKind,
    g: PropertyGraph,
    params: Mapping[str, Any],
    produced: Any,
) -> bool:
    """Task-aware verdict on a produced answer.

    Booleans and integers compare exactly; flow and triangle sums compare
    as exact rationals; a topological order is accepted iff it is valid
    for the graph; a shortest path is accepted iff it is a real path of
    optimal weight (an attached cost claim, if any, must match).  A
    produced value whose shape cannot belong to the task raises
    ``ValueError``.
    """
    if task in _BOOLEAN_TASKS:
        if not isinstance(produced, bool):
            raise ValueError(f"{task.value} answers are booleans")
        return produced == solve(task, g, params)

    if task in _INTEGER_TASKS:
        if isinstance(produced, bool) or not isinstance(produced, int):
            raise ValueError(f"{task.value} answers are integers")
        return produced == solve(task, g, params)

    if task in _RATIONAL_TASKS:
        value = _coerce_rational(produced)
        if value is None and produced is not None:
            raise ValueError(f"{task.value} answers are rationals")
        truth = solve(task, g, params)
        if truth is None or produced is None:
            return truth is None and produced is None
        return value == truth

    if task is TaskKind.TOPOLOGICAL_SORT:
        truth_exists = topological_sort(g) is not None
        if produced is None:
            return not truth_exists
        order = _coerce_node_seq(produced)
        if order is None:
            raise ValueError("topological sort answers are node sequences")
        if not truth_exists:
            return False
        if sorted(order) != list(range(g.node_count)):
            return False
        position = {v: i for i, v in enumerate(order)}
        return all(position[e.u] < position[e.v] for e in g.edges)

    if task is TaskKind.SHORTEST_PATH:
        optimum = shortest_path(g, params["src"], params["dst"])
        if produced is None:
            return optimum is None
        path, claimed = _split_path_answer(produced)
        if path is None:
            raise ValueError(
                "shortest path answers are (node sequence, cost) pairs"
            )
        if optimum is None:
            return False
        if not _path_is_valid(g, path, params["src"], params["dst"]):
            return False
        actual = _path_cost(g, path)
        if claimed is not None and claimed != actual:
            return False
        return actual == Fraction(optimum[1])

    raise ValueError(f"unknown task {task!r}")


def _split_path_answer(produced: Any) -> tuple[list[int] | None, Fraction | None]:
    """Accept ([nodes], cost), [nodes] alone, or [[nodes], cost] lists."""
    if isinstance(produced, (list, tuple)):
        if (
            len(produced) == 2
            and isinstance(produced[0], (list, tuple))
        ):
            path = _coerce_node_seq(produced[0])
            cost = _coerce_rational(produced[1])
            if path is not None and cost is not None:
                return path, cost
            return None, None
        path = _coerce_node_seq(produced)
        if path is not None:
            return path, None
    return None, None
