"""A small, deterministic graph-query language for hermetic execution.

Programs run against one immutable graph through read-only primitives;
there is no I/O, no recursion, and no user-defined functions, so every
long-running program goes through a metered loop and can be stopped at
a wall-clock deadline.  Values are integers, exact rationals, booleans,
strings, ``none``, lists, queues, sets, maps, and heaps.

Syntax (newline- or ``;``-separated statements, ``#`` comments)::

    dist = map()
    frontier = heap()
    hpush(frontier, 0, src)
    while len(frontier) > 0 do
      item = hpop(frontier)
      d = item[0]
      u = item[1]
      if not contains(dist, u) then
        put(dist, u, d)
        for v in neighbors(u) do
          hpush(frontier, d + edge_weight(u, v), v)
        end
      end
    end
    return get(dist, dst, none)

Statements: assignment (``name = expr``), ``if/then/elif/else/end``,
``while ... do ... end``, ``for name in expr do ... end``, ``break``,
``continue``, ``return [expr]``, and bare calls.  Conditions must be
booleans.  Arithmetic is exact: ``/`` produces rationals.

Graph primitives: ``node_count() nodes() neighbors(v) in_neighbors(v)
edges() edge_weight(u,v) edge_capacity(u,v) has_edge(u,v) indegree(v)
outdegree(v) node_weight(v)``.  Collections: ``list() queue() stack()
set() map() heap()`` with ``push pop len get put set_at add remove
contains keys sort reverse range to_list min max abs sum floor hpush
hpop``.
"""

from __future__ import annotations

import heapq
import re
import time
from collections import deque
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable

from .graphs import PropertyGraph


class GraphScriptError(Exception):
    """Base class for embedded-language failures."""


class GraphScriptSyntaxError(GraphScriptError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"syntax error at line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class GraphScriptRuntimeError(GraphScriptError):
    pass


class GraphScriptTimeout(GraphScriptError):
    pass


_MAX_MATERIALIZED = 10_000_000

# -- lexer -------------------------------------------------------------------

_KEYWORDS = frozenset(
    "if then elif else end while do for in break continue return "
    "and or not true false none".split()
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n|;)
  | (?P<number>\d+\.\d+|\d+)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<op>==|!=|<=|>=|[-+*/%<>=(),\[\]])
    """,
    re.VERBOSE,
)


class _Token:
    __slots__ = ("kind", "value", "line", "col")

    def __init__(self, kind: str, value, line: int, col: int):
        self.kind = kind
        self.value = value
        self.line = line
        self.col = col


def _lex(src: str) -> list[_Token]:
    tokens: list[_Token] = []
    line = 1
    line_start = 0
    pos = 0
    n = len(src)
    while pos < n:
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise GraphScriptSyntaxError(
                f"unexpected character {src[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        pos = m.end()
        if kind == "ws" or kind == "comment":
            continue
        if kind == "newline":
            if text == "\n":
                line += 1
                line_start = pos
            if tokens and tokens[-1].kind == "sep":
                continue
            tokens.append(_Token("sep", text, line, col))
            continue
        if kind == "number":
            value = Fraction(text) if "." in text else int(text)
            if isinstance(value, Fraction) and value.denominator == 1:
                value = int(value)
            tokens.append(_Token("number", value, line, col))
        elif kind == "name":
            if text in _KEYWORDS:
                tokens.append(_Token(text, text, line, col))
            else:
                tokens.append(_Token("name", text, line, col))
        elif kind == "string":
            body = text[1:-1]
            body = body.replace("\\\"", "\"").replace("\\\\", "\\").replace("\\n", "\n")
            tokens.append(_Token("string", body, line, col))
        else:
            tokens.append(_Token(text, text, line, col))
    tokens.append(_Token("eof", None, line, pos - line_start + 1))
    return tokens


# -- runtime -----------------------------------------------------------------

class _Heap:
    __slots__ = ("items", "seq")

    def __init__(self):
        self.items: list = []
        self.seq = 0


class _Return:
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value


_BREAK = object()
_CONTINUE = object()


class _Rt:
    __slots__ = (
        "graph", "vars", "ops", "next_check", "deadline",
        "adj", "in_adj", "edge_map", "directed", "node_weights",
        "edge_pairs",
    )

    def __init__(self, graph: PropertyGraph, deadline: float | None):
        self.graph = graph
        self.vars: dict[str, Any] = {}
        self.ops = 0
        self.next_check = 256
        self.deadline = deadline
        self.adj = graph._adjacency
        self.in_adj = graph._in_adjacency
        self.edge_map = graph._edge_map
        self.directed = graph.directed
        self.node_weights = graph.node_weights
        self.edge_pairs: tuple | None = None

    def check(self) -> None:
        self.next_check = self.ops + 256
        if self.deadline is not None and time.monotonic() >= self.deadline:
            raise GraphScriptTimeout("time limit exceeded")

    def charge(self, n: int) -> None:
        self.ops += n
        if self.ops >= self.next_check:
            self.check()


def _simp(x: Fraction):
    return x.numerator if x.denominator == 1 else x


def _typename(v) -> str:
    if v is None:
        return "none"
    if v is True or v is False:
        return "boolean"
    t = type(v)
    if t is int:
        return "integer"
    if t is Fraction:
        return "rational"
    if t is str:
        return "string"
    if t is list:
        return "list"
    if t is tuple:
        return "list"
    if t is range:
        return "range"
    if t is deque:
        return "queue"
    if t is set:
        return "set"
    if t is dict:
        return "map"
    if t is _Heap:
        return "heap"
    return t.__name__


def _err(msg: str) -> GraphScriptRuntimeError:
    return GraphScriptRuntimeError(msg)


def _need_number(v, context: str):
    if type(v) is int or type(v) is Fraction:
        return v
    raise _err(f"type error: {context} expects a number, got {_typename(v)}")


def _need_int(v, context: str) -> int:
    if type(v) is int:
        return v
    raise _err(f"type error: {context} expects an integer, got {_typename(v)}")


def _need_node(rt: _Rt, v, context: str) -> int:
    if type(v) is not int:
        raise _err(f"type error: {context} expects an integer node id, got {_typename(v)}")
    if not 0 <= v < len(rt.adj):
        raise _err(f"node id {v} out of range for graph with {len(rt.adj)} nodes")
    return v


def _safe_len(c) -> int:
    try:
        return len(c)
    except OverflowError:
        raise _err("collection too large") from None


def _key_hashable(k, context: str):
    if type(k) is list or type(k) is dict or type(k) is set or type(k) is deque:
        raise _err(f"type error: {context} key/element must be immutable, got {_typename(k)}")
    return k


def _sorted_values(rt: _Rt, values, context: str) -> list:
    rt.charge(len(values) + 1)
    try:
        return sorted(values)
    except TypeError:
        raise _err(f"type error: cannot order mixed values in {context}") from None


# -- builtins ------------------------------------------------------------------

def _edge_key(rt: _Rt, u: int, v: int) -> tuple[int, int]:
    if not rt.directed and u > v:
        return (v, u)
    return (u, v)


def _bi_node_count(rt):
    return len(rt.adj)


def _bi_nodes(rt):
    return range(len(rt.adj))


def _bi_neighbors(rt, v):
    return rt.adj[_need_node(rt, v, "neighbors")]


def _bi_in_neighbors(rt, v):
    return rt.in_adj[_need_node(rt, v, "in_neighbors")]


def _bi_edges(rt):
    if rt.edge_pairs is None:
        rt.edge_pairs = tuple((e.u, e.v) for e in rt.graph.edges)
    rt.charge(len(rt.edge_pairs))
    return rt.edge_pairs


def _bi_edge_weight(rt, u, v):
    key = _edge_key(rt, _need_node(rt, u, "edge_weight"), _need_node(rt, v, "edge_weight"))
    edge = rt.edge_map.get(key)
    if edge is None:
        raise _err(f"no edge between {u} and {v}")
    return 1 if edge.weight is None else _simp(edge.weight)


def _bi_edge_capacity(rt, u, v):
    key = _edge_key(rt, _need_node(rt, u, "edge_capacity"), _need_node(rt, v, "edge_capacity"))
    edge = rt.edge_map.get(key)
    if edge is None:
        raise _err(f"no edge between {u} and {v}")
    return 0 if edge.capacity is None else _simp(edge.capacity)


def _bi_has_edge(rt, u, v):
    key = _edge_key(rt, _need_node(rt, u, "has_edge"), _need_node(rt, v, "has_edge"))
    return key in rt.edge_map


def _bi_indegree(rt, v):
    if not rt.directed:
        raise _err("indegree requires a directed graph")
    return len(rt.in_adj[_need_node(rt, v, "indegree")])


def _bi_outdegree(rt, v):
    if not rt.directed:
        raise _err("outdegree requires a directed graph")
    return len(rt.adj[_need_node(rt, v, "outdegree")])


def _bi_node_weight(rt, v):
    w = rt.node_weights[_need_node(rt, v, "node_weight")]
    if w is None:
        raise _err(f"node {v} has no weight")
    return _simp(w)


def _bi_list(rt):
    return []


def _bi_queue(rt):
    return deque()


def _bi_set(rt):
    return set()


def _bi_map(rt):
    return {}


def _bi_heap(rt):
    return _Heap()


def _bi_push(rt, c, x):
    t = type(c)
    if t is list:
        c.append(x)
    elif t is deque:
        c.append(x)
    else:
        raise _err(f"type error: push expects a list or queue, got {_typename(c)}")
    return None


def _bi_pop(rt, c):
    t = type(c)
    try:
        if t is list:
            return c.pop()
        if t is deque:
            return c.popleft()
    except IndexError:
        raise _err("pop from empty collection") from None
    raise _err(f"type error: pop expects a list or queue, got {_typename(c)}")


def _bi_len(rt, c):
    if type(c) in (list, tuple, deque, set, dict, range, str):
        return _safe_len(c)
    if type(c) is _Heap:
        return len(c.items)
    raise _err(f"type error: len expects a collection, got {_typename(c)}")


def _bi_get(rt, c, k, *default):
    t = type(c)
    if t is dict:
        k = _key_hashable(k, "get")
        if k in c:
            return c[k]
        if default:
            return default[0]
        raise _err(f"map has no key {_render(k)}")
    if t in (list, tuple, range, deque):
        i = _need_int(k, "get")
        size = _safe_len(c)
        if -size <= i < size:
            return c[i]
        if default:
            return default[0]
        raise _err(f"index {i} out of range for length {size}")
    raise _err(f"type error: get expects a map or sequence, got {_typename(c)}")


def _bi_put(rt, m, k, v):
    if type(m) is not dict:
        raise _err(f"type error: put expects a map, got {_typename(m)}")
    m[_key_hashable(k, "put")] = v
    return None


def _bi_set_at(rt, xs, i, v):
    if type(xs) is not list:
        raise _err(f"type error: set_at expects a list, got {_typename(xs)}")
    i = _need_int(i, "set_at")
    if not -len(xs) <= i < len(xs):
        raise _err(f"index {i} out of range for length {len(xs)}")
    xs[i] = v
    return None


def _bi_add(rt, s, x):
    if type(s) is not set:
        raise _err(f"type error: add expects a set, got {_typename(s)}")
    s.add(_key_hashable(x, "add"))
    return None


def _bi_remove(rt, c, x):
    t = type(c)
    if t is set:
        try:
            c.remove(x)
        except KeyError:
            raise _err(f"{_render(x)} not in set") from None
        return None
    if t is dict:
        try:
            del c[x]
        except (KeyError, TypeError):
            raise _err(f"map has no key {_render(x)}") from None
        return None
    raise _err(f"type error: remove expects a set or map, got {_typename(c)}")


def _bi_contains(rt, c, x):
    t = type(c)
    if t is set or t is dict:
        try:
            return x in c
        except TypeError:
            raise _err(
                f"type error: cannot test membership of {_typename(x)}"
            ) from None
    if t is range:
        # int membership in a range is O(1); anything else is absent
        return type(x) is int and x in c
    if t in (list, tuple, deque):
        rt.charge(len(c))
        return x in c
    raise _err(f"type error: contains expects a collection, got {_typename(c)}")


def _bi_keys(rt, m):
    if type(m) is not dict:
        raise _err(f"type error: keys expects a map, got {_typename(m)}")
    return _sorted_values(rt, list(m.keys()), "keys")


def _bi_sort(rt, xs):
    if type(xs) not in (list, tuple, range, deque):
        raise _err(f"type error: sort expects a sequence, got {_typename(xs)}")
    if _safe_len(xs) > _MAX_MATERIALIZED:
        raise _err("collection too large to materialize")
    return _sorted_values(rt, list(xs), "sort")


def _bi_reverse(rt, xs):
    if type(xs) not in (list, tuple, range, deque):
        raise _err(f"type error: reverse expects a sequence, got {_typename(xs)}")
    if _safe_len(xs) > _MAX_MATERIALIZED:
        raise _err("collection too large to materialize")
    rt.charge(len(xs))
    out = list(xs)
    out.reverse()
    return out


def _bi_range(rt, a, b, *step):
    a = _need_int(a, "range")
    b = _need_int(b, "range")
    s = _need_int(step[0], "range") if step else 1
    if s == 0:
        raise _err("range step must not be zero")
    return range(a, b, s)


def _bi_to_list(rt, x):
    if type(x) in (list, tuple, range, deque, set, dict):
        size = _safe_len(x)
        if size > _MAX_MATERIALIZED:
            raise _err(f"collection too large to materialize ({size} elements)")
        rt.charge(size)
        if type(x) is set:
            return _sorted_values(rt, list(x), "to_list")
        if type(x) is dict:
            return _sorted_values(rt, list(x.keys()), "to_list")
        return list(x)
    raise _err(f"type error: to_list expects a collection, got {_typename(x)}")


def _bi_min(rt, *args):
    return _minmax(rt, args, min, "min")


def _bi_max(rt, *args):
    return _minmax(rt, args, max, "max")


def _minmax(rt, args, fn, name):
    if len(args) == 1:
        xs = args[0]
        if type(xs) not in (list, tuple, range, deque, set):
            raise _err(f"type error: {name} expects a sequence or two values")
        if len(xs) == 0:
            raise _err(f"{name} of empty collection")
        rt.charge(len(xs))
        try:
            return fn(xs)
        except TypeError:
            raise _err(f"type error: cannot order mixed values in {name}") from None
    try:
        return fn(args)
    except TypeError:
        raise _err(f"type error: cannot order mixed values in {name}") from None


def _bi_abs(rt, x):
    return abs(_need_number(x, "abs"))


def _bi_sum(rt, xs):
    if type(xs) not in (list, tuple, range, deque):
        raise _err(f"type error: sum expects a sequence, got {_typename(xs)}")
    rt.charge(_safe_len(xs))
    total = 0
    for v in xs:
        total = total + _need_number(v, "sum")
    return _simp(total) if type(total) is Fraction else total


def _bi_floor(rt, x):
    x = _need_number(x, "floor")
    if type(x) is int:
        return x
    return x.numerator // x.denominator


def _bi_hpush(rt, h, priority, x):
    if type(h) is not _Heap:
        raise _err(f"type error: hpush expects a heap, got {_typename(h)}")
    _need_number(priority, "hpush priority")
    h.seq += 1
    heapq.heappush(h.items, (priority, h.seq, x))
    return None


def _bi_hpop(rt, h):
    if type(h) is not _Heap:
        raise _err(f"type error: hpop expects a heap, got {_typename(h)}")
    if not h.items:
        raise _err("hpop from empty heap")
    priority, _seq, x = heapq.heappop(h.items)
    return (priority, x)


#: name -> (min_args, max_args, impl); max_args None means unbounded
_BUILTINS: dict[str, tuple[int, int | None, Callable]] = {
    "node_count": (0, 0, _bi_node_count),
    "nodes": (0, 0, _bi_nodes),
    "neighbors": (1, 1, _bi_neighbors),
    "in_neighbors": (1, 1, _bi_in_neighbors),
    "edges": (0, 0, _bi_edges),
    "edge_weight": (2, 2, _bi_edge_weight),
    "edge_capacity": (2, 2, _bi_edge_capacity),
    "has_edge": (2, 2, _bi_has_edge),
    "indegree": (1, 1, _bi_indegree),
    "outdegree": (1, 1, _bi_outdegree),
    "node_weight": (1, 1, _bi_node_weight),
    "list": (0, 0, _bi_list),
    "queue": (0, 0, _bi_queue),
    "stack": (0, 0, _bi_list),
    "set": (0, 0, _bi_set),
    "map": (0, 0, _bi_map),
    "heap": (0, 0, _bi_heap),
    "push": (2, 2, _bi_push),
    "pop": (1, 1, _bi_pop),
    "len": (1, 1, _bi_len),
    "get": (2, 3, _bi_get),
    "put": (3, 3, _bi_put),
    "set_at": (3, 3, _bi_set_at),
    "add": (2, 2, _bi_add),
    "remove": (2, 2, _bi_remove),
    "contains": (2, 2, _bi_contains),
    "keys": (1, 1, _bi_keys),
    "sort": (1, 1, _bi_sort),
    "reverse": (1, 1, _bi_reverse),
    "range": (2, 3, _bi_range),
    "to_list": (1, 1, _bi_to_list),
    "min": (1, 2, _bi_min),
    "max": (1, 2, _bi_max),
    "abs": (1, 1, _bi_abs),
    "sum": (1, 1, _bi_sum),
    "floor": (1, 1, _bi_floor),
    "hpush": (3, 3, _bi_hpush),
    "hpop": (1, 1, _bi_hpop),
}


def _render(v) -> str:
    if v is None:
        return "none"
    if v is True:
        return "true"
    if v is False:
        return "false"
    if type(v) is Fraction:
        return f"{v.numerator}/{v.denominator}"
    return repr(v) if type(v) is str else str(v)


# -- arithmetic helpers ---------------------------------------------------------

def _add_values(a, b):
    ta, tb = type(a), type(b)
    if ta is int and tb is int:
        return a + b
    if ta in (int, Fraction) and tb in (int, Fraction):
        return _simp(Fraction(a) + Fraction(b))
    if ta is str and tb is str:
        return a + b
    if ta in (list, tuple) and tb in (list, tuple):
        return list(a) + list(b)
    raise _err(f"type error: cannot add {_typename(a)} and {_typename(b)}")


def _sub_values(a, b):
    if type(a) is int and type(b) is int:
        return a - b
    if type(a) in (int, Fraction) and type(b) in (int, Fraction):
        return _simp(Fraction(a) - Fraction(b))
    raise _err(f"type error: cannot subtract {_typename(b)} from {_typename(a)}")


def _mul_values(a, b):
    if type(a) is int and type(b) is int:
        return a * b
    if type(a) in (int, Fraction) and type(b) in (int, Fraction):
        return _simp(Fraction(a) * Fraction(b))
    raise _err(f"type error: cannot multiply {_typename(a)} and {_typename(b)}")


def _div_values(a, b):
    if type(a) in (int, Fraction) and type(b) in (int, Fraction):
        if b == 0:
            raise _err("division by zero")
        return _simp(Fraction(a) / Fraction(b))
    raise _err(f"type error: cannot divide {_typename(a)} by {_typename(b)}")


def _mod_values(a, b):
    if type(a) is int and type(b) is int:
        if b == 0:
            raise _err("division by zero in '%'")
        return a % b
    raise _err(f"type error: '%' expects integers")


def _equal(a, b) -> bool:
    """Type-aware equality: booleans never equal numbers; lists and
    immutable sequences compare element-wise."""
    ta, tb = type(a), type(b)
    if (ta is bool) != (tb is bool):
        return False
    if ta in (list, tuple) and tb in (list, tuple):
        if len(a) != len(b):
            return False
        return all(_equal(x, y) for x, y in zip(a, b))
    return a == b


def _compare(op: str, a, b) -> bool:
    ta, tb = type(a), type(b)
    if ta in (int, Fraction) and tb in (int, Fraction):
        pass
    elif ta is str and tb is str:
        pass
    else:
        raise _err(
            f"type error: cannot order {_typename(a)} and {_typename(b)}"
        )
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def _iter_values(rt: _Rt, v, line: int):
    t = type(v)
    if t is tuple or t is range:
        return v
    if t is list or t is deque:
        rt.charge(len(v))
        return tuple(v)
    if t is set:
        return tuple(_sorted_values(rt, list(v), "for"))
    if t is dict:
        return tuple(_sorted_values(rt, list(v.keys()), "for"))
    raise _err(f"type error: cannot iterate over {_typename(v)} (line {line})")


# -- parser / compiler -----------------------------------------------------------

_Expr = Callable[[_Rt], Any]
_Stmt = Callable[[_Rt], Any]

_BLOCK_ENDERS = frozenset({"end", "elif", "else", "eof"})


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.assigned: set[str] = set()

    # token plumbing

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise self.fail(f"expected {kind!r}, found {self._describe(tok)}")
        return self.advance()

    def accept(self, kind: str) -> bool:
        if self.peek().kind == kind:
            self.advance()
            return True
        return False

    @staticmethod
    def _describe(tok: _Token) -> str:
        if tok.kind == "eof":
            return "end of input"
        if tok.kind == "sep":
            return "end of statement"
        return repr(tok.value)

    def fail(self, message: str) -> GraphScriptSyntaxError:
        tok = self.peek()
        return GraphScriptSyntaxError(message, tok.line, tok.col)

    def skip_seps(self) -> None:
        while self.peek().kind == "sep":
            self.advance()

    # statements

    def parse_program(self) -> _Stmt:
        body = self.parse_block(stop={"eof"})
        self.expect("eof")
        return body

    def parse_block(self, stop: set[str] | frozenset[str] = _BLOCK_ENDERS) -> _Stmt:
        stmts: list[_Stmt] = []
        self.skip_seps()
        while self.peek().kind not in stop:
            stmts.append(self.parse_statement())
            if self.peek().kind in stop:
                break
            if self.peek().kind != "sep":
                raise self.fail(
                    f"expected end of statement, found {self._describe(self.peek())}"
                )
            self.skip_seps()
        if len(stmts) == 1:
            return stmts[0]
        sequence = tuple(stmts)

        def block(rt, _seq=sequence):
            for s in _seq:
                sig = s(rt)
                if sig is not None:
                    return sig
            return None

        return block

    def parse_statement(self) -> _Stmt:
        tok = self.peek()
        kind = tok.kind
        if kind == "return":
            self.advance()
            if self.peek().kind in ("sep", "end", "eof"):
                return lambda rt: _RETURN_NONE
            value = self.parse_expr()
            return lambda rt, _v=value: _Return(_v(rt))
        if kind == "break":
            self.advance()
            return lambda rt: _BREAK
        if kind == "continue":
            self.advance()
            return lambda rt: _CONTINUE
        if kind == "if":
            return self.parse_if()
        if kind == "while":
            return self.parse_while()
        if kind == "for":
            return self.parse_for()
        if kind == "name" and self.tokens[self.pos + 1].kind == "=":
            name = self.advance().value
            if name in _BUILTINS:
                raise GraphScriptSyntaxError(
                    f"cannot assign to builtin {name!r}", tok.line, tok.col
                )
            self.advance()
            value = self.parse_expr()
            self.assigned.add(name)

            def assign(rt, _n=name, _v=value):
                rt.vars[_n] = _v(rt)
                return None

            return assign
        expr = self.parse_expr()

        def expr_stmt(rt, _e=expr):
            _e(rt)
            return None

        return expr_stmt

    def _condition(self, expr: _Expr, line: int) -> _Expr:
        def cond(rt, _e=expr, _line=line):
            v = _e(rt)
            if v is True or v is False:
                return v
            raise _err(
                f"type error: condition must be a boolean, got {_typename(v)} "
                f"(line {_line})"
            )

        return cond

    def parse_if(self) -> _Stmt:
        tok = self.expect("if")
        cond = self._condition(self.parse_expr(), tok.line)
        self.expect("then")
        body = self.parse_block()
        branches = [(cond, body)]
        else_body: _Stmt | None = None
        while True:
            if self.accept("elif"):
                etok = self.tokens[self.pos - 1]
                econd = self._condition(self.parse_expr(), etok.line)
                self.expect("then")
                branches.append((econd, self.parse_block()))
                continue
            if self.accept("else"):
                else_body = self.parse_block(stop=frozenset({"end", "eof"}))
            self.expect("end")
            break
        if len(branches) == 1:
            c0, b0 = branches[0]
            if else_body is None:
                def simple_if(rt, _c=c0, _b=b0):
                    if _c(rt):
                        return _b(rt)
                    return None
                return simple_if

            def if_else(rt, _c=c0, _b=b0, _e=else_body):
                return _b(rt) if _c(rt) else _e(rt)
            return if_else

        chain = tuple(branches)

        def multi_if(rt, _chain=chain, _else=else_body):
            for c, b in _chain:
                if c(rt):
                    return b(rt)
            if _else is not None:
                return _else(rt)
            return None

        return multi_if

    def parse_while(self) -> _Stmt:
        tok = self.expect("while")
        cond = self._condition(self.parse_expr(), tok.line)
        self.expect("do")
        body = self.parse_block(stop=frozenset({"end", "eof"}))
        self.expect("end")

        def loop(rt, _c=cond, _b=body):
            while True:
                rt.ops += 1
                if rt.ops >= rt.next_check:
                    rt.check()
                if not _c(rt):
                    return None
                sig = _b(rt)
                if sig is not None:
                    if sig is _BREAK:
                        return None
                    if sig is _CONTINUE:
                        continue
                    return sig

        return loop

    def parse_for(self) -> _Stmt:
        self.expect("for")
        name_tok = self.expect("name")
        if name_tok.value in _BUILTINS:
            raise GraphScriptSyntaxError(
                f"cannot assign to builtin {name_tok.value!r}",
                name_tok.line,
                name_tok.col,
            )
        self.expect("in")
        source = self.parse_expr()
        self.expect("do")
        body = self.parse_block(stop=frozenset({"end", "eof"}))
        self.expect("end")
        line = name_tok.line
        name = name_tok.value
        self.assigned.add(name)

        def loop(rt, _n=name, _src=source, _b=body, _line=line):
            values = _iter_values(rt, _src(rt), _line)
            vars_ = rt.vars
            for item in values:
                rt.ops += 1
                if rt.ops >= rt.next_check:
                    rt.check()
                vars_[_n] = item
                sig = _b(rt)
                if sig is not None:
                    if sig is _BREAK:
                        return None
                    if sig is _CONTINUE:
                        continue
                    return sig
            return None

        return loop

    # expressions (precedence climbing)

    def parse_expr(self) -> _Expr:
        return self.parse_or()

    def parse_or(self) -> _Expr:
        left = self.parse_and()
        while self.peek().kind == "or":
            tok = self.advance()
            right = self.parse_and()
            left = self._bool_op(left, right, tok.line, is_or=True)
        return left

    def parse_and(self) -> _Expr:
        left = self.parse_not()
        while self.peek().kind == "and":
            tok = self.advance()
            right = self.parse_not()
            left = self._bool_op(left, right, tok.line, is_or=False)
        return left

    def _bool_op(self, left, right, line, is_or):
        def op(rt, _l=left, _r=right, _line=line, _or=is_or):
            a = _l(rt)
            if a is not True and a is not False:
                raise _err(
                    f"type error: '{'or' if _or else 'and'}' expects booleans, "
                    f"got {_typename(a)} (line {_line})"
                )
            if _or and a:
                return True
            if not _or and not a:
                return False
            b = _r(rt)
            if b is not True and b is not False:
                raise _err(
                    f"type error: '{'or' if _or else 'and'}' expects booleans, "
                    f"got {_typename(b)} (line {_line})"
                )
            return b

        return op

    def parse_not(self) -> _Expr:
        if self.peek().kind == "not":
            tok = self.advance()
            operand = self.parse_not()

            def negate(rt, _o=operand, _line=tok.line):
                v = _o(rt)
                if v is True:
                    return False
                if v is False:
                    return True
                raise _err(
                    f"type error: 'not' expects a boolean, got {_typename(v)} "
                    f"(line {_line})"
                )

            return negate
        return self.parse_comparison()

    def parse_comparison(self) -> _Expr:
        left = self.parse_additive()
        kind = self.peek().kind
        if kind in ("==", "!=", "<", "<=", ">", ">="):
            self.advance()
            right = self.parse_additive()
            if kind == "==":
                return lambda rt, _l=left, _r=right: _equal(_l(rt), _r(rt))
            if kind == "!=":
                return lambda rt, _l=left, _r=right: not _equal(_l(rt), _r(rt))
            return lambda rt, _l=left, _r=right, _op=kind: _compare(
                _op, _l(rt), _r(rt)
            )
        return left

    def parse_additive(self) -> _Expr:
        left = self.parse_multiplicative()
        while True:
            kind = self.peek().kind
            if kind == "+":
                self.advance()
                right = self.parse_multiplicative()

                def add(rt, _l=left, _r=right):
                    a = _l(rt)
                    b = _r(rt)
                    if type(a) is int and type(b) is int:
                        return a + b
                    return _add_values(a, b)

                left = add
            elif kind == "-":
                self.advance()
                right = self.parse_multiplicative()

                def sub(rt, _l=left, _r=right):
                    a = _l(rt)
                    b = _r(rt)
                    if type(a) is int and type(b) is int:
                        return a - b
                    return _sub_values(a, b)

                left = sub
            else:
                return left

    def parse_multiplicative(self) -> _Expr:
        left = self.parse_unary()
        while True:
            kind = self.peek().kind
            if kind == "*":
                self.advance()
                right = self.parse_unary()
                left = lambda rt, _l=left, _r=right: _mul_values(_l(rt), _r(rt))
            elif kind == "/":
                self.advance()
                right = self.parse_unary()
                left = lambda rt, _l=left, _r=right: _div_values(_l(rt), _r(rt))
            elif kind == "%":
                self.advance()
                right = self.parse_unary()
                left = lambda rt, _l=left, _r=right: _mod_values(_l(rt), _r(rt))
            else:
                return left

    def parse_unary(self) -> _Expr:
        if self.peek().kind == "-":
            self.advance()
            operand = self.parse_unary()

            def neg(rt, _o=operand):
                v = _o(rt)
                if type(v) is int:
                    return -v
                if type(v) is Fraction:
                    return -v
                raise _err(f"type error: cannot negate {_typename(v)}")

            return neg
        return self.parse_postfix()

    def parse_postfix(self) -> _Expr:
        expr = self.parse_atom()
        while self.peek().kind == "[":
            self.advance()
            index = self.parse_expr()
            self.expect("]")

            def subscript(rt, _c=expr, _i=index):
                return _bi_get(rt, _c(rt), _i(rt))

            expr = subscript
        return expr

    def parse_atom(self) -> _Expr:
        tok = self.peek()
        kind = tok.kind
        if kind == "number":
            self.advance()
            return lambda rt, _v=tok.value: _v
        if kind == "string":
            self.advance()
            return lambda rt, _v=tok.value: _v
        if kind == "true":
            self.advance()
            return lambda rt: True
        if kind == "false":
            self.advance()
            return lambda rt: False
        if kind == "none":
            self.advance()
            return lambda rt: None
        if kind == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if kind == "[":
            self.advance()
            items: list[_Expr] = []
            if self.peek().kind != "]":
                items.append(self.parse_expr())
                while self.accept(","):
                    items.append(self.parse_expr())
            self.expect("]")
            elements = tuple(items)
            return lambda rt, _e=elements: [fn(rt) for fn in _e]
        if kind == "name":
            name = tok.value
            if self.tokens[self.pos + 1].kind == "(":
                return self.parse_call()
            self.advance()

            def load(rt, _n=name):
                try:
                    return rt.vars[_n]
                except KeyError:
                    raise _err(f"undefined variable '{_n}'") from None

            return load
        raise self.fail(f"unexpected {self._describe(tok)}")

    def parse_call(self) -> _Expr:
        name_tok = self.advance()
        name = name_tok.value
        spec = _BUILTINS.get(name)
        if spec is None:
            raise GraphScriptSyntaxError(
                f"unknown function {name!r}", name_tok.line, name_tok.col
            )
        min_args, max_args, impl = spec
        self.expect("(")
        args: list[_Expr] = []
        if self.peek().kind != ")":
            args.append(self.parse_expr())
            while self.accept(","):
                args.append(self.parse_expr())
        self.expect(")")
        if len(args) < min_args or (max_args is not None and len(args) > max_args):
            raise GraphScriptSyntaxError(
                f"{name} expects {min_args}"
                + (f"..{max_args}" if max_args != min_args else "")
                + f" arguments, got {len(args)}",
                name_tok.line,
                name_tok.col,
            )
        if len(args) == 0:
            def call0(rt, _f=impl):
                rt.ops += 1
                if rt.ops >= rt.next_check:
                    rt.check()
                return _f(rt)
            return call0
        if len(args) == 1:
            a0 = args[0]

            def call1(rt, _f=impl, _a=a0):
                rt.ops += 1
                if rt.ops >= rt.next_check:
                    rt.check()
                return _f(rt, _a(rt))
            return call1
        if len(args) == 2:
            a0, a1 = args

            def call2(rt, _f=impl, _a=a0, _b=a1):
                rt.ops += 1
                if rt.ops >= rt.next_check:
                    rt.check()
                return _f(rt, _a(rt), _b(rt))
            return call2
        arg_tuple = tuple(args)

        def calln(rt, _f=impl, _args=arg_tuple):
            rt.ops += 1
            if rt.ops >= rt.next_check:
                rt.check()
            return _f(rt, *[a(rt) for a in _args])
        return calln


_RETURN_NONE = _Return(None)


class CompiledProgram:
    """A parsed program; reusable across graphs and threads."""

    def __init__(self, entry: _Stmt, source: str):
        self._entry = entry
        self.source = source

    def run(self, graph: PropertyGraph, time_limit_s: float | None = None):
        deadline = (
            None if time_limit_s is None else time.monotonic() + time_limit_s
        )
        rt = _Rt(graph, deadline)
        sig = self._entry(rt)
        if isinstance(sig, _Return):
            return sig.value
        if sig is _BREAK or sig is _CONTINUE:
            raise _err("break/continue outside a loop")
        return None


@lru_cache(maxsize=512)
def _compile_cached(src: str) -> CompiledProgram:
    parser = _Parser(_lex(src))
    return CompiledProgram(parser.parse_program(), src)


def compile_script(src: str) -> CompiledProgram:
    """Parse and compile; raises :class:`GraphScriptSyntaxError`."""
    return _compile_cached(src)


def eval_graph_script(
    src: str, graph: PropertyGraph, time_limit_s: float | None = None
):
    """Parse (cached) and evaluate a program against a graph."""
    return compile_script(src).run(graph, time_limit_s)
