"""One-shot sandbox runner for generated graph code.

Reads a single JSON request from stdin::

    {"code": str, "graph_path": str, "time_limit_s": number}

loads the canonical-JSON graph at ``graph_path`` into a networkx graph
bound to the variable ``G``, executes ``code``, and writes exactly one
single-line JSON response to stdout::

    {"status": "ok"|"error", "answer": any, "error": str?,
     "wall_time_ms": int}

The answer is taken from a ``result`` variable binding, or from the
code's value when it is a single expression.  The process always emits
a response and always exits 0 (protocol failures are reported in the
response body, never via the exit code).  No time limiting happens
here: the parent process enforces deadlines by killing the process
tree, so ``time_limit_s`` is informational.

Anything the executed code prints goes to stderr, keeping stdout clean
for the protocol.
"""

from __future__ import annotations

import json
import math
import sys
import time
import traceback

import networkx as nx


def load_graph(path: str) -> "nx.Graph":
    """Canonical JSON -> networkx graph with exact attribute values."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    graph = nx.DiGraph() if doc["directed"] else nx.Graph()
    for node in doc["nodes"]:
        attrs = {}
        if node.get("weight") is not None:
            attrs["weight"] = node["weight"]
        graph.add_node(node["id"], **attrs)
    for edge in doc["edges"]:
        attrs = {}
        if edge.get("weight") is not None:
            attrs["weight"] = edge["weight"]
        if edge.get("capacity") is not None:
            attrs["capacity"] = edge["capacity"]
        graph.add_edge(edge["u"], edge["v"], **attrs)
    return graph


def json_safe(value):
    """Coerce arbitrary script results into strict-JSON-safe values."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return value if math.isfinite(value) else str(value)
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, (set, frozenset)):
        try:
            ordered = sorted(value)
        except TypeError:
            ordered = sorted(value, key=repr)
        return [json_safe(v) for v in ordered]
    return str(value)


def run_code(code: str, graph) -> object:
    """Execute generated code; expression value or `result` binding."""
    namespace = {"G": graph, "nx": nx, "math": math}
    try:
        compiled = compile(code, "<generated>", "eval")
    except SyntaxError:
        compiled = None
    if compiled is not None:
        return eval(compiled, namespace)  # noqa: S307 - configured code runner
    exec(compile(code, "<generated>", "exec"), namespace)  # noqa: S102
    return namespace.get("result")


def handle_request(raw: str) -> dict:
    started = time.monotonic()

    def done(ms_from=started):
        return int((time.monotonic() - ms_from) * 1000)

    try:
        request = json.loads(raw)
    except json.JSONDecodeError as exc:
        return {
            "status": "error",
            "answer": None,
            "error": f"malformed request: {exc}",
            "wall_time_ms": done(),
        }
    if not isinstance(request, dict) or "code" not in request or "graph_path" not in request:
        return {
            "status": "error",
            "answer": None,
            "error": "malformed request: need 'code' and 'graph_path'",
            "wall_time_ms": done(),
        }
    try:
        graph = load_graph(request["graph_path"])
    except Exception as exc:
        return {
            "status": "error",
            "answer": None,
            "error": f"cannot load graph {request['graph_path']!r}: {exc}",
            "wall_time_ms": done(),
        }
    # keep stdout protocol-clean; script prints land on stderr
    captured_stdout = sys.stdout
    sys.stdout = sys.stderr
    try:
        answer = run_code(str(request["code"]), graph)
    except BaseException:
        return {
            "status": "error",
            "answer": None,
            "error": traceback.format_exc(),
            "wall_time_ms": done(),
        }
    finally:
        sys.stdout = captured_stdout
    return {
        "status": "ok",
        "answer": json_safe(answer),
        "wall_time_ms": done(),
    }


def main() -> int:
    try:
        raw = sys.stdin.read()
    except Exception as exc:
        raw = ""
    response = handle_request(raw)
    try:
        line = json.dumps(response, allow_nan=False)
    except (TypeError, ValueError):
        line = json.dumps(
            {
                "status": "error",
                "answer": None,
                "error": "response not serializable",
                "wall_time_ms": response.get("wall_time_ms", 0),
            }
        )
    sys.stdout.write(line + "\n")
    sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
