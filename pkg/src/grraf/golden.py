"""Verified graph-script programs for every task.

These are the programs the benchmark substitutes for generated code in
golden-code mode: each one is rendered per question (node ids and, for
matching, the whole pattern are inlined as literals) and is equivalent
to the corresponding reference oracle.  ``delay_loop_iters`` prepends a
busy loop, which the sensitivity sweep uses to simulate slow code.
"""

from __future__ import annotations

from typing import Any, Mapping

from .graphs import PropertyGraph
from .oracles import TaskKind

_DIRECTED_CYCLE = """
indeg = map()
for v in nodes() do put(indeg, v, indegree(v)) end
q = queue()
for v in nodes() do
  if get(indeg, v) == 0 then push(q, v) end
end
seen = 0
while len(q) > 0 do
  u = pop(q)
  seen = seen + 1
  for v in neighbors(u) do
    put(indeg, v, get(indeg, v) - 1)
    if get(indeg, v) == 0 then push(q, v) end
  end
end
return seen != node_count()
"""

_UNDIRECTED_CYCLE = """
visited = set()
parent = map()
found = false
for s in nodes() do
  if not found and not contains(visited, s) then
    add(visited, s)
    put(parent, s, -1)
    q = queue()
    push(q, s)
    while len(q) > 0 do
      u = pop(q)
      for v in neighbors(u) do
        if v != u then
          if not contains(visited, v) then
            add(visited, v)
            put(parent, v, u)
            push(q, v)
          elif get(parent, u) != v then
            found = true
          end
        end
      end
    end
  end
end
return found
"""

_CONNECTIVITY = """
start = {u}
goal = {v}
if start == goal then return true end
seen = set()
add(seen, start)
q = queue()
push(q, start)
while len(q) > 0 do
  u = pop(q)
  for v in neighbors(u) do
    if not contains(seen, v) then
      if v == goal then return true end
      add(seen, v)
      push(q, v)
    end
  end
end
return false
"""

_BIPARTITE = """
color = map()
for s in nodes() do
  if not contains(color, s) then
    put(color, s, 0)
    q = queue()
    push(q, s)
    while len(q) > 0 do
      u = pop(q)
      for v in neighbors(u) do
        if not contains(color, v) then
          put(color, v, 1 - get(color, u))
          push(q, v)
        elif get(color, v) == get(color, u) then
          return false
        end
      end
    end
  end
end
return true
"""

_TOPOLOGICAL_SORT = """
indeg = map()
for v in nodes() do put(indeg, v, indegree(v)) end
q = queue()
for v in nodes() do
  if get(indeg, v) == 0 then push(q, v) end
end
order = list()
while len(q) > 0 do
  u = pop(q)
  push(order, u)
  for v in neighbors(u) do
    put(indeg, v, get(indeg, v) - 1)
    if get(indeg, v) == 0 then push(q, v) end
  end
end
if len(order) != node_count() then return none end
return order
"""

_SHORTEST_PATH = """
source = {src}
target = {dst}
if source == target then return [[source], 0] end
dist = map()
prev = map()
frontier = heap()
hpush(frontier, 0, [source, -1])
while len(frontier) > 0 do
  item = hpop(frontier)
  pair = item[1]
  u = pair[0]
  if not contains(dist, u) then
    d = item[0]
    put(dist, u, d)
    put(prev, u, pair[1])
    if u == target then break end
    for v in neighbors(u) do
      if not contains(dist, v) then
        hpush(frontier, d + {step_cost}, [v, u])
      end
    end
  end
end
if not contains(dist, target) then return none end
path = list()
cur = target
while cur != -1 do
  push(path, cur)
  cur = get(prev, cur)
end
return [reverse(path), get(dist, target)]
"""

_MAX_TRIANGLE_SUM = """
best = 0
found = false
for e in edges() do
  a = e[0]
  b = e[1]
  if a != b then
    for c in neighbors(a) do
      if c != a and c != b and has_edge(b, c) then
        total = node_weight(a) + node_weight(b) + node_weight(c)
        if not found or total > best then
          best = total
          found = true
        end
      end
    end
  end
end
if not found then return none end
return best
"""

_MAX_FLOW = """
source = {s}
sink = {t}
cap = map()
for v in nodes() do put(cap, v, map()) end
for e in edges() do
  u = e[0]
  v = e[1]
  m = get(cap, u)
  put(m, v, get(m, v, 0) + edge_capacity(u, v))
  m2 = get(cap, v)
  if not contains(m2, u) then put(m2, u, 0) end
end
flow = 0
running = true
while running do
  parent = map()
  put(parent, source, source)
  q = queue()
  push(q, source)
  while len(q) > 0 and not contains(parent, sink) do
    u = pop(q)
    m = get(cap, u)
    for v in keys(m) do
      if not contains(parent, v) and get(m, v) > 0 then
        put(parent, v, u)
        push(q, v)
      end
    end
  end
  if not contains(parent, sink) then
    running = false
  else
    bottleneck = 0
    first = true
    v = sink
    while v != source do
      u = get(parent, v)
      c = get(get(cap, u), v)
      if first or c < bottleneck then
        bottleneck = c
        first = false
      end
      v = u
    end
    v = sink
    while v != source do
      u = get(parent, v)
      mu = get(cap, u)
      put(mu, v, get(mu, v) - bottleneck)
      mv = get(cap, v)
      put(mv, u, get(mv, u) + bottleneck)
      v = u
    end
    flow = flow + bottleneck
  end
end
return flow
"""

_SUBGRAPH_MATCH = """
k = {k}
n = node_count()
if k > n then return false end
cons = {cons}
selfloop = {selfloop}
need_out = {need_out}
need_in = {need_in}
assign = list()
used = set()
cursor = list()
push(cursor, 0)
found = false
while len(cursor) > 0 and not found do
  d = len(assign)
  c = get(cursor, len(cursor) - 1)
  if c >= n then
    pop(cursor)
    if len(assign) > 0 then
      freed = pop(assign)
      remove(used, freed)
      set_at(cursor, len(cursor) - 1, get(cursor, len(cursor) - 1) + 1)
    end
  else
    ok = not contains(used, c)
    if ok and {out_degree_of_c} < get(need_out, d) then ok = false end
    if ok and {in_degree_of_c} < get(need_in, d) then ok = false end
    if ok and get(selfloop, d) == 1 and not has_edge(c, c) then ok = false end
    if ok then
      for con in get(cons, d) do
        if ok then
          mapped = get(assign, con[0])
          if con[1] == 0 then
            if not has_edge(mapped, c) then ok = false end
          else
            if not has_edge(c, mapped) then ok = false end
          end
        end
      end
    end
    if ok then
      push(assign, c)
      add(used, c)
      if len(assign) == k then
        found = true
      else
        push(cursor, 0)
      end
    else
      set_at(cursor, len(cursor) - 1, c + 1)
    end
  end
end
return found
"""

_INDEGREE = "return indegree({v})\n"
_OUTDEGREE = "return outdegree({v})\n"


def _literal(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_literal(v) for v in value) + "]"
    raise TypeError(f"cannot render literal for {value!r}")


def _render_subgraph(g: PropertyGraph, pattern: PropertyGraph) -> str:
    if pattern.node_count == 0:
        return "return true\n"
    k = pattern.node_count
    out_deg = [len(pattern.neighbors(v)) for v in range(k)]
    in_deg = [len(pattern.in_neighbors(v)) for v in range(k)]
    # place high-degree pattern nodes first, preferring ones adjacent to
    # already-placed nodes so partial assignments are constrained early
    order: list[int] = []
    placed: set[int] = set()
    remaining = set(range(k))
    while remaining:
        connected = {
            v
            for v in remaining
            if any(
                u in placed
                for u in set(pattern.neighbors(v)) | set(pattern.in_neighbors(v))
            )
        }
        pool = connected or remaining
        nxt = max(pool, key=lambda v: (out_deg[v] + in_deg[v], -v))
        order.append(nxt)
        placed.add(nxt)
        remaining.discard(nxt)
    position = {node: i for i, node in enumerate(order)}
    cons: list[list[list[int]]] = [[] for _ in range(k)]
    selfloop = [0] * k
    for e in pattern.edges:
        if e.u == e.v:
            selfloop[position[e.u]] = 1
            continue
        pu, pv = position[e.u], position[e.v]
        if pu < pv:
            # earlier position pu maps to `mapped`; edge u->v means
            # has_edge(mapped, c) for directed, either way for undirected
            cons[pv].append([pu, 0])
        else:
            cons[pu].append([pv, 1])
    need_out = [out_deg[node] for node in order]
    need_in = [in_deg[node] for node in order]
    if g.directed:
        out_expr = "outdegree(c)"
        in_expr = "indegree(c)"
    else:
        out_expr = "len(neighbors(c))"
        in_expr = "len(neighbors(c))"
    return _SUBGRAPH_MATCH.format(
        k=k,
        cons=_literal(cons),
        selfloop=_literal(selfloop),
        need_out=_literal(need_out),
        need_in=_literal(need_in),
        out_degree_of_c=out_expr,
        in_degree_of_c=in_expr,
    )


def golden_source(
    task: TaskKind,
    g: PropertyGraph,
    params: Mapping[str, Any],
    delay_loop_iters: int = 0,
) -> str:
    """Render the verified program for a question instance."""
    if task is TaskKind.CYCLE_DETECTION:
        body = _DIRECTED_CYCLE if g.directed else _UNDIRECTED_CYCLE
    elif task is TaskKind.CONNECTIVITY:
        body = _CONNECTIVITY.format(u=params["u"], v=params["v"])
    elif task is TaskKind.BIPARTITE_CHECK:
        body = _BIPARTITE
    elif task is TaskKind.TOPOLOGICAL_SORT:
        body = _TOPOLOGICAL_SORT
    elif task is TaskKind.SHORTEST_PATH:
        weighted = any(e.weight is not None for e in g.edges)
        body = _SHORTEST_PATH.format(
            src=params["src"],
            dst=params["dst"],
            step_cost="edge_weight(u, v)" if weighted else "1",
        )
    elif task is TaskKind.MAX_TRIANGLE_SUM:
        body = _MAX_TRIANGLE_SUM
    elif task is TaskKind.MAX_FLOW:
        body = _MAX_FLOW.format(s=params["s"], t=params["t"])
    elif task is TaskKind.SUBGRAPH_MATCHING:
        body = _render_subgraph(g, params["pattern"])
    elif task is TaskKind.INDEGREE:
        body = _INDEGREE.format(v=params["v"])
    elif task is TaskKind.OUTDEGREE:
        body = _OUTDEGREE.format(v=params["v"])
    else:
        raise ValueError(f"unknown task {task!r}")
    if delay_loop_iters > 0:
        prefix = (
            f"spin = 0\nwhile spin < {delay_loop_iters} do "
            "spin = spin + 1 end\n"
        )
        return prefix + body
    return body
