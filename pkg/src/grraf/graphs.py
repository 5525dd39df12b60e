"""Property-graph data model, ingestion dialects, and schema extraction.

Graphs are immutable after construction and safe to share across threads.
Node ids are contiguous integers ``0..node_count-1``.  Edge weights and
capacities are exact rationals (``fractions.Fraction``); node weights are
optional rationals.  Self-loops are allowed (and flagged); parallel edges
are rejected, and for undirected graphs ``(u, v)`` and ``(v, u)`` denote
the same edge.

Two serialization dialects are supported:

* ``edge-list-prose``: a fixed plain-text grammar::

      graph   := ("directed" | "undirected") ";" "nodes:" INT
                 [";" "node-weights:" (INT "=" NUM)*]
                 ";" "edges:" edge*
      edge    := "(" INT "," INT ")" tag*
      tag     := "[w=" NUM "]" | "[c=" NUM "]"
      NUM     := INT | INT "." digits | INT "/" INT

  Whitespace (including newlines) between tokens is insignificant.

* ``canonical-json``: ``{"directed": bool, "nodes": [{"id": int,
  "weight": number?}, ...], "edges": [{"u": int, "v": int,
  "weight": number?, "capacity": number?}, ...]}``.  JSON numbers are
  parsed with decimal semantics, so integer and decimal weights
  round-trip exactly.
"""

from __future__ import annotations

import json
import re
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

DIALECT_PROSE = "edge-list-prose"
DIALECT_JSON = "canonical-json"
DIALECTS = (DIALECT_PROSE, DIALECT_JSON)

Rational = Fraction


class GraphError(Exception):
    """Base class for graph model errors."""


class GraphParseError(GraphError):
    """Malformed graph text; carries the 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class GraphValidationError(GraphError):
    """Structurally invalid graph (bad endpoint, duplicate edge, ...)."""


def _as_rational(value: int | float | str | Fraction) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise GraphValidationError("boolean is not a valid weight")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # Decimal semantics: 2.5 -> 5/2 exactly, independent of binary repr.
        return Fraction(str(value))
    return Fraction(value)


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    weight: Fraction | None = None
    capacity: Fraction | None = None


@dataclass(frozen=True)
class PropertyGraph:
    """Immutable directed or undirected graph with optional properties.

    ``node_weights[i]`` is the weight of node ``i`` or ``None``.  For
    undirected graphs edge endpoints are normalized to ``u <= v`` at
    construction time; insertion order of edges is preserved.
    """

    directed: bool
    node_count: int
    edges: tuple[Edge, ...]
    node_weights: tuple[Fraction | None, ...]

    def __post_init__(self) -> None:
        if self.node_count < 0:
            raise GraphValidationError("node_count must be non-negative")
        if len(self.node_weights) != self.node_count:
            raise GraphValidationError(
                f"node_weights has {len(self.node_weights)} entries "
                f"for {self.node_count} nodes"
            )
        seen: set[tuple[int, int]] = set()
        for e in self.edges:
            for endpoint in (e.u, e.v):
                if not (0 <= endpoint < self.node_count):
                    raise GraphValidationError(
                        f"edge ({e.u},{e.v}) endpoint {endpoint} out of range "
                        f"[0, {self.node_count})"
                    )
            if e.weight is not None and e.weight < 0:
                raise GraphValidationError(
                    f"edge ({e.u},{e.v}) has negative weight {e.weight}"
                )
            if e.capacity is not None and e.capacity < 0:
                raise GraphValidationError(
                    f"edge ({e.u},{e.v}) has negative capacity {e.capacity}"
                )
            if not self.directed and e.u > e.v:
                raise GraphValidationError(
                    f"undirected edge ({e.u},{e.v}) not normalized (u <= v)"
                )
            key = (e.u, e.v)
            if key in seen:
                raise GraphValidationError(f"duplicate edge ({e.u},{e.v})")
            seen.add(key)

    # -- accessors ---------------------------------------------------------

    @cached_property
    def _adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Out-neighbors (all neighbors when undirected), ascending."""
        adj: list[set[int]] = [set() for _ in range(self.node_count)]
        for e in self.edges:
            adj[e.u].add(e.v)
            if not self.directed:
                adj[e.v].add(e.u)
        return tuple(tuple(sorted(s)) for s in adj)

    @cached_property
    def _in_adjacency(self) -> tuple[tuple[int, ...], ...]:
        if not self.directed:
            return self._adjacency
        adj: list[set[int]] = [set() for _ in range(self.node_count)]
        for e in self.edges:
            adj[e.v].add(e.u)
        return tuple(tuple(sorted(s)) for s in adj)

    @cached_property
    def _edge_map(self) -> dict[tuple[int, int], Edge]:
        return {(e.u, e.v): e for e in self.edges}

    def _key(self, u: int, v: int) -> tuple[int, int]:
        if not self.directed and u > v:
            return (v, u)
        return (u, v)

    def check_node(self, v: int) -> int:
        if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v < self.node_count:
            raise GraphValidationError(
                f"invalid node id {v!r} for graph with {self.node_count} nodes"
            )
        return v

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adjacency[self.check_node(v)]

    def in_neighbors(self, v: int) -> tuple[int, ...]:
        return self._in_adjacency[self.check_node(v)]

    def has_edge(self, u: int, v: int) -> bool:
        self.check_node(u)
        self.check_node(v)
        return self._key(u, v) in self._edge_map

    def edge_between(self, u: int, v: int) -> Edge | None:
        self.check_node(u)
        self.check_node(v)
        return self._edge_map.get(self._key(u, v))

    def node_weight(self, v: int) -> Fraction | None:
        return self.node_weights[self.check_node(v)]

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def has_self_loops(self) -> bool:
        return any(e.u == e.v for e in self.edges)

    def canonical_edge_set(self) -> frozenset[tuple]:
        return frozenset(
            (e.u, e.v, e.weight, e.capacity) for e in self.edges
        )

    def same_graph(self, other: "PropertyGraph") -> bool:
        """Structural equality: directedness, nodes, and edge multiset."""
        return (
            self.directed == other.directed
            and self.node_count == other.node_count
            and self.node_weights == other.node_weights
            and self.canonical_edge_set() == other.canonical_edge_set()
        )


def graph_from_edges(
    directed: bool,
    node_count: int,
    edges: Iterable[Edge | tuple | Sequence],
    node_weights: Mapping[int, int | float | str | Fraction] | Sequence | None = None,
) -> PropertyGraph:
    """Build a validated graph from loose edge tuples.

    Each edge may be an :class:`Edge`, a ``(u, v)`` pair, or a
    ``(u, v, weight)`` / ``(u, v, weight, capacity)`` tuple.  Undirected
    endpoints are normalized here.
    """
    norm_edges: list[Edge] = []
    for item in edges:
        if isinstance(item, Edge):
            u, v, w, c = item.u, item.v, item.weight, item.capacity
        else:
            u, v = item[0], item[1]
            w = item[2] if len(item) > 2 else None
            c = item[3] if len(item) > 3 else None
        if not directed and u > v:
            u, v = v, u
        norm_edges.append(
            Edge(
                u,
                v,
                None if w is None else _as_rational(w),
                None if c is None else _as_rational(c),
            )
        )
    weights: list[Fraction | None] = [None] * node_count
    if node_weights is not None:
        if isinstance(node_weights, Mapping):
            items = node_weights.items()
        else:
            items = enumerate(node_weights)
        for i, w in items:
            if w is not None:
                if not 0 <= i < node_count:
                    raise GraphValidationError(f"node weight for invalid id {i}")
                weights[i] = _as_rational(w)
    return PropertyGraph(
        directed=directed,
        node_count=node_count,
        edges=tuple(norm_edges),
        node_weights=tuple(weights),
    )


# -- schema extraction -----------------------------------------------------

KIND_INTEGER = "integer"
KIND_RATIONAL = "rational"
KIND_TEXT = "text"


@dataclass(frozen=True)
class PropertyInfo:
    name: str
    kind: str


@dataclass(frozen=True)
class GraphSchema:
    directed: bool
    node_properties: tuple[PropertyInfo, ...]
    edge_properties: tuple[PropertyInfo, ...]

    def describe(self) -> str:
        """Stable human-readable rendering used in prompts."""

        def fmt(props: tuple[PropertyInfo, ...]) -> str:
            if not props:
                return "none"
            return ", ".join(f"{p.name} ({p.kind})" for p in props)

        kind = "directed" if self.directed else "undirected"
        return (
            f"{kind} graph; node properties: {fmt(self.node_properties)}; "
            f"edge properties: {fmt(self.edge_properties)}"
        )


def extract_schema(g: PropertyGraph) -> GraphSchema:
    """List exactly the properties present anywhere in the graph.

    Deterministic: property lists are sorted by name.  Weights and
    capacities are stored as rationals, so their kind is ``rational``.
    """
    node_props = set()
    if any(w is not None for w in g.node_weights):
        node_props.add(PropertyInfo("weight", KIND_RATIONAL))
    edge_props = set()
    if any(e.weight is not None for e in g.edges):
        edge_props.add(PropertyInfo("weight", KIND_RATIONAL))
    if any(e.capacity is not None for e in g.edges):
        edge_props.add(PropertyInfo("capacity", KIND_RATIONAL))
    return GraphSchema(
        directed=g.directed,
        node_properties=tuple(sorted(node_props, key=lambda p: p.name)),
        edge_properties=tuple(sorted(edge_props, key=lambda p: p.name)),
    )


# -- plain-text dialect ----------------------------------------------------

_NUM_RE = re.compile(r"-?\d+(?:\.\d+)?(?:/\d+)?")
_INT_RE = re.compile(r"-?\d+")


class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _line_col(self, pos: int) -> tuple[int, int]:
        line = self.text.count("\n", 0, pos) + 1
        last_nl = self.text.rfind("\n", 0, pos)
        return line, pos - last_nl

    def fail(self, message: str) -> "GraphParseError":
        line, col = self._line_col(self.pos)
        return GraphParseError(message, line, col)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def expect(self, literal: str) -> None:
        self.skip_ws()
        if not self.text.startswith(literal, self.pos):
            raise self.fail(f"expected {literal!r}")
        self.pos += len(literal)

    def try_literal(self, literal: str) -> bool:
        self.skip_ws()
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def read_int(self) -> int:
        self.skip_ws()
        m = _INT_RE.match(self.text, self.pos)
        if not m:
            raise self.fail("expected an integer")
        self.pos = m.end()
        return int(m.group())

    def read_number(self) -> Fraction:
        self.skip_ws()
        m = _NUM_RE.match(self.text, self.pos)
        if not m:
            raise self.fail("expected a number")
        self.pos = m.end()
        return Fraction(m.group())


def _format_rational(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _parse_prose(text: str) -> PropertyGraph:
    cur = _Cursor(text)
    if cur.try_literal("directed"):
        directed = True
    elif cur.try_literal("undirected"):
        directed = False
    else:
        raise cur.fail("expected 'directed' or 'undirected'")
    cur.expect(";")
    cur.expect("nodes:")
    node_count = cur.read_int()
    if node_count < 0:
        raise cur.fail("node count must be non-negative")
    cur.expect(";")
    node_weights: dict[int, Fraction] = {}
    if cur.try_literal("node-weights:"):
        while True:
            cur.skip_ws()
            m = _INT_RE.match(cur.text, cur.pos)
            if not m:
                break
            node_id = cur.read_int()
            cur.expect("=")
            node_weights[node_id] = cur.read_number()
        cur.expect(";")
    cur.expect("edges:")
    edges: list[tuple] = []
    while not cur.at_end():
        cur.expect("(")
        u = cur.read_int()
        cur.expect(",")
        v = cur.read_int()
        cur.expect(")")
        weight = capacity = None
        while cur.try_literal("["):
            if cur.try_literal("w="):
                weight = cur.read_number()
            elif cur.try_literal("c="):
                capacity = cur.read_number()
            else:
                raise cur.fail("expected 'w=' or 'c=' in edge tag")
            cur.expect("]")
        edges.append((u, v, weight, capacity))
    for node_id in node_weights:
        if not 0 <= node_id < node_count:
            raise GraphValidationError(
                f"node weight for invalid id {node_id}"
            )
    return graph_from_edges(directed, node_count, edges, node_weights)


def _serialize_prose(g: PropertyGraph) -> str:
    parts = ["directed" if g.directed else "undirected", "; "]
    parts.append(f"nodes: {g.node_count}")
    weighted = [
        (i, w) for i, w in enumerate(g.node_weights) if w is not None
    ]
    if weighted:
        rendered = " ".join(f"{i}={_format_rational(w)}" for i, w in weighted)
        parts.append(f"; node-weights: {rendered}")
    parts.append("; edges:")
    for e in g.edges:
        tag = ""
        if e.weight is not None:
            tag += f"[w={_format_rational(e.weight)}]"
        if e.capacity is not None:
            tag += f"[c={_format_rational(e.capacity)}]"
        parts.append(f" ({e.u},{e.v}){tag}")
    return "".join(parts)


# -- canonical JSON dialect -------------------------------------------------

def _number_to_json(x: Fraction) -> int | float:
    if x.denominator == 1:
        return x.numerator
    return float(x)


def _parse_json(text: str) -> PropertyGraph:
    try:
        # parse_float keeps decimal semantics for weights like 2.5
        doc = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise GraphParseError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(doc, dict):
        raise GraphParseError("top-level JSON value must be an object", 1, 1)
    try:
        directed = doc["directed"]
        nodes = doc["nodes"]
        edges_doc = doc["edges"]
    except KeyError as exc:
        raise GraphParseError(f"missing key {exc.args[0]!r}", 1, 1) from exc
    if not isinstance(directed, bool):
        raise GraphValidationError("'directed' must be a boolean")
    ids = []
    weights: dict[int, Fraction] = {}
    for n in nodes:
        node_id = n["id"]
        ids.append(node_id)
        if "weight" in n and n["weight"] is not None:
            weights[node_id] = _as_rational(n["weight"])
    node_count = len(ids)
    if sorted(ids) != list(range(node_count)):
        raise GraphValidationError(
            "node ids must form the contiguous range 0..node_count-1"
        )
    edges = [
        (e["u"], e["v"], e.get("weight"), e.get("capacity"))
        for e in edges_doc
    ]
    return graph_from_edges(directed, node_count, edges, weights)


def _serialize_json(g: PropertyGraph) -> str:
    nodes = []
    for i in range(g.node_count):
        node: dict = {"id": i}
        if g.node_weights[i] is not None:
            node["weight"] = _number_to_json(g.node_weights[i])
        nodes.append(node)
    edges = []
    for e in g.edges:
        doc: dict = {"u": e.u, "v": e.v}
        if e.weight is not None:
            doc["weight"] = _number_to_json(e.weight)
        if e.capacity is not None:
            doc["capacity"] = _number_to_json(e.capacity)
        edges.append(doc)
    return json.dumps(
        {"directed": g.directed, "nodes": nodes, "edges": edges},
        sort_keys=True,
    )


def parse_graph_text(text: str, dialect: str = DIALECT_PROSE) -> PropertyGraph:
    """Parse graph text in the named dialect.

    Raises :class:`GraphParseError` (with line/column) on malformed
    syntax and :class:`GraphValidationError` on structural violations.
    """
    if dialect == DIALECT_PROSE:
        return _parse_prose(text)
    if dialect == DIALECT_JSON:
        return _parse_json(text)
    raise ValueError(f"unknown dialect {dialect!r}")


def serialize(g: PropertyGraph, dialect: str = DIALECT_PROSE) -> str:
    """Serialize so that ``parse_graph_text(serialize(g, d), d)`` round-trips."""
    if dialect == DIALECT_PROSE:
        return _serialize_prose(g)
    if dialect == DIALECT_JSON:
        return _serialize_json(g)
    raise ValueError(f"unknown dialect {dialect!r}")


def load_graph_file(path: str | Path) -> PropertyGraph:
    """Load a graph file, picking the dialect from the extension.

    ``.json`` files use the canonical JSON dialect; anything else is
    parsed as plain text.
    """
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    dialect = DIALECT_JSON if p.suffix == ".json" else DIALECT_PROSE
    return parse_graph_text(text, dialect)


class GraphStore:
    """Named graph storage backing pipeline questions.

    Holds in-memory graphs registered under names and resolves other
    references as file paths (absolute, or relative to ``root``).  When
    a file path for an in-memory graph is needed (the external execution
    backend passes graphs by path), the graph is spooled to a canonical
    JSON file on demand.
    """

    def __init__(self, root: str | Path | None = None):
        self.root = Path(root) if root is not None else None
        self._graphs: dict[str, PropertyGraph] = {}
        self._spooled: dict[str, Path] = {}
        self._spool_dir: Path | None = None

    def add(self, name: str, graph: PropertyGraph) -> None:
        self._graphs[name] = graph
        self._spooled.pop(name, None)

    def __contains__(self, ref: str) -> bool:
        return ref in self._graphs or self._resolve_path(ref) is not None

    def _resolve_path(self, ref: str) -> Path | None:
        p = Path(ref)
        if p.is_file():
            return p
        if self.root is not None:
            q = self.root / ref
            if q.is_file():
                return q
        return None

    def load(self, ref: str) -> PropertyGraph:
        if ref in self._graphs:
            return self._graphs[ref]
        path = self._resolve_path(ref)
        if path is None:
            raise FileNotFoundError(f"graph {ref!r} not found")
        return load_graph_file(path)

    def path_for(self, ref: str) -> Path:
        if ref in self._graphs:
            if ref not in self._spooled:
                if self._spool_dir is None:
                    self._spool_dir = Path(
                        tempfile.mkdtemp(prefix="grraf-graphs-")
                    )
                safe = re.sub(r"[^\w.-]", "_", ref)
                path = self._spool_dir / f"{safe}.json"
                path.write_text(
                    serialize(self._graphs[ref], DIALECT_JSON), encoding="utf-8"
                )
                self._spooled[ref] = path
            return self._spooled[ref]
        path = self._resolve_path(ref)
        if path is None:
            raise FileNotFoundError(f"graph {ref!r} not found")
        return path
