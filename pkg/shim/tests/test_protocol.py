"""Protocol conformance: every invocation emits one valid JSON response.

Each case drives the shim exactly the way the parent executor does: a
fresh process, one JSON request on stdin, one single-line JSON response
on stdout, exit code 0 regardless of script outcome.
"""

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

SRC = Path(__file__).resolve().parents[1] / "src"

DIRECTED_GRAPH = {
    "directed": True,
    "nodes": [{"id": 0, "weight": 3}, {"id": 1}, {"id": 2, "weight": 2.5}],
    "edges": [
        {"u": 0, "v": 1, "weight": 4, "capacity": 7},
        {"u": 1, "v": 2, "weight": 1.5},
    ],
}

UNDIRECTED_GRAPH = {
    "directed": False,
    "nodes": [{"id": i} for i in range(7)],
    "edges": [{"u": i, "v": i + 1} for i in range(6)],
}


def invoke(stdin_text):
    env = dict(os.environ)
    env["PYTHONPATH"] = str(SRC) + os.pathsep + env.get("PYTHONPATH", "")
    proc = subprocess.run(
        [sys.executable, "-m", "grraf_shim"],
        input=stdin_text,
        capture_output=True,
        text=True,
        env=env,
        timeout=60,
    )
    return proc


def call(code, graph_doc, tmp_path, time_limit=5.0):
    graph_path = tmp_path / "g.json"
    graph_path.write_text(json.dumps(graph_doc), encoding="utf-8")
    request = json.dumps(
        {"code": code, "graph_path": str(graph_path), "time_limit_s": time_limit}
    )
    return invoke(request)


def parse_response(proc):
    # exactly one line of byte-valid JSON on stdout, exit code 0
    assert proc.returncode == 0
    lines = [l for l in proc.stdout.splitlines() if l.strip()]
    assert len(lines) == 1, proc.stdout
    doc = json.loads(lines[0])
    assert doc["status"] in ("ok", "error")
    assert "wall_time_ms" in doc
    assert isinstance(doc["wall_time_ms"], int)
    return doc


class TestOkPaths:
    def test_01_result_binding(self, tmp_path):
        doc = parse_response(
            call("result = G.number_of_nodes()", UNDIRECTED_GRAPH, tmp_path)
        )
        assert doc == {**doc, "status": "ok", "answer": 7}

    def test_02_bare_expression_value(self, tmp_path):
        doc = parse_response(call("G.number_of_edges()", UNDIRECTED_GRAPH, tmp_path))
        assert doc["status"] == "ok"
        assert doc["answer"] == 6

    def test_03_networkx_algorithm(self, tmp_path):
        code = "result = nx.shortest_path(G, 0, 6)"
        doc = parse_response(call(code, UNDIRECTED_GRAPH, tmp_path))
        assert doc["status"] == "ok"
        assert doc["answer"] == [0, 1, 2, 3, 4, 5, 6]

    def test_04_missing_result_is_null(self, tmp_path):
        doc = parse_response(call("x = 41 + 1", UNDIRECTED_GRAPH, tmp_path))
        assert doc["status"] == "ok"
        assert doc["answer"] is None

    def test_05_prints_do_not_corrupt_protocol(self, tmp_path):
        code = 'print("chatter")\nresult = 5'
        proc = call(code, UNDIRECTED_GRAPH, tmp_path)
        doc = parse_response(proc)
        assert doc["answer"] == 5
        assert "chatter" in proc.stderr

    def test_06_non_serializable_answer_coerced(self, tmp_path):
        doc = parse_response(call("result = {2, 1, 3}", UNDIRECTED_GRAPH, tmp_path))
        assert doc["status"] == "ok"
        assert doc["answer"] == [1, 2, 3]


class TestErrorPaths:
    def test_07_script_exception_carries_traceback(self, tmp_path):
        doc = parse_response(call("1/0", UNDIRECTED_GRAPH, tmp_path))
        assert doc["status"] == "error"
        assert "ZeroDivision" in doc["error"]
        assert doc["answer"] is None

    def test_08_malformed_request_still_valid_response(self):
        doc = parse_response(invoke("this is not json"))
        assert doc["status"] == "error"
        assert "malformed request" in doc["error"]

    def test_09_missing_graph_path_key(self):
        doc = parse_response(invoke(json.dumps({"code": "result = 1"})))
        assert doc["status"] == "error"
        assert "graph_path" in doc["error"]

    def test_10_nonexistent_graph_file(self, tmp_path):
        request = json.dumps(
            {
                "code": "result = 1",
                "graph_path": str(tmp_path / "missing.json"),
                "time_limit_s": 5,
            }
        )
        doc = parse_response(invoke(request))
        assert doc["status"] == "error"
        assert "missing.json" in doc["error"]


class TestGraphFidelity:
    def test_11_attribute_fidelity_exact(self, tmp_path):
        code = (
            "result = ["
            "G.number_of_nodes(), G.number_of_edges(), "
            "G.nodes[0].get('weight'), G.nodes[1].get('weight'), "
            "G.nodes[2].get('weight'), "
            "G[0][1]['weight'], G[0][1]['capacity'], G[1][2]['weight'], "
            "G[1][2].get('capacity')]"
        )
        doc = parse_response(call(code, DIRECTED_GRAPH, tmp_path))
        assert doc["status"] == "ok"
        assert doc["answer"] == [3, 2, 3, None, 2.5, 4, 7, 1.5, None]

    def test_12_directedness_honored(self, tmp_path):
        directed_code = "result = [G.is_directed(), G.has_edge(0, 1), G.has_edge(1, 0)]"
        doc = parse_response(call(directed_code, DIRECTED_GRAPH, tmp_path))
        assert doc["answer"] == [True, True, False]
        doc = parse_response(call(directed_code, UNDIRECTED_GRAPH, tmp_path))
        assert doc["answer"] == [False, True, True]
