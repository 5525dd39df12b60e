import json

import pytest

from grraf.cli import main
from grraf.graphs import DIALECT_JSON, parse_graph_text, serialize

GRAPH_TEXT = "undirected; nodes: 3; edges: (0,1) (1,2)"

GOOD_CODE = """```
seen = set()
q = queue()
push(q, 0)
add(seen, 0)
while len(q) > 0 do
  u = pop(q)
  for v in neighbors(u) do
    if not contains(seen, v) then
      add(seen, v)
      push(q, v)
    end
  end
end
return contains(seen, 2)
```"""


@pytest.fixture
def graph_json(tmp_path):
    g = parse_graph_text(GRAPH_TEXT)
    path = tmp_path / "g.json"
    path.write_text(serialize(g, DIALECT_JSON), encoding="utf-8")
    return path


@pytest.fixture
def script_file(tmp_path):
    path = tmp_path / "script.json"
    path.write_text(
        json.dumps(
            [
                "Is node 0 connected to node 2?",
                "```\nsketch\n```",
                GOOD_CODE,
                "Yes, they are connected.",
            ]
        ),
        encoding="utf-8",
    )
    return path


class TestAsk:
    def test_happy_path_prints_naturalized(self, graph_json, script_file, capsys):
        code = main(
            [
                "ask",
                "--graph", str(graph_json),
                "--question", "Does node 0 connect to node 2?",
                "--llm", f"scripted:{script_file}",
            ]
        )
        assert code == 0
        assert "Yes, they are connected." in capsys.readouterr().out

    def test_missing_graph_exits_2_and_names_path(self, script_file, capsys):
        code = main(
            [
                "ask",
                "--graph", "/nope/missing.json",
                "--question", "q?",
                "--llm", f"scripted:{script_file}",
            ]
        )
        assert code == 2
        assert "missing.json" in capsys.readouterr().err

    def test_record_written(self, graph_json, script_file, tmp_path, capsys):
        out = tmp_path / "record.json"
        code = main(
            [
                "ask",
                "--graph", str(graph_json),
                "--question", "Does node 0 connect to node 2?",
                "--llm", f"scripted:{script_file}",
                "--record", str(out),
                "--task", "connectivity",
            ]
        )
        assert code == 0
        doc = json.loads(out.read_text(encoding="utf-8"))
        assert doc["answer"] is True
        assert doc["attempts"] == 1
        assert doc["fallback_used"] is False
        assert doc["usage"]["input_tokens"] > 0

    def test_bad_flag_exits_64(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["ask", "--nonsense"])
        assert exc.value.code == 64

    def test_live_without_env_exits_2(self, graph_json, monkeypatch, capsys):
        monkeypatch.delenv("GRRAF_LLM_ENDPOINT", raising=False)
        code = main(
            ["ask", "--graph", str(graph_json), "--question", "q?"]
        )
        assert code == 2

    def test_live_endpoint_from_config_file(
        self, graph_json, tmp_path, monkeypatch, capsys
    ):
        # endpoint picked up from the config file, no env needed; the
        # unreachable endpoint surfaces as a config-free transport error
        monkeypatch.delenv("GRRAF_LLM_ENDPOINT", raising=False)
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps(
                {"llm": {"endpoint": "http://127.0.0.1:1/v1", "api_key": "k"}}
            ),
            encoding="utf-8",
        )
        code = main(
            [
                "ask", "--graph", str(graph_json), "--question", "q?",
                "--templates", str(cfg),
            ]
        )
        assert code == 2  # transport failure reported as CLI error, not a crash

    def test_custom_templates_applied(self, graph_json, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps(
                {"templates": {"refine": "REWRITE {prompt} FOR {graph_name}"}}
            ),
            encoding="utf-8",
        )
        script = tmp_path / "s.json"
        script.write_text(
            json.dumps(["q", "```\ns\n```", "```\nreturn 1\n```", "One."]),
            encoding="utf-8",
        )
        record = tmp_path / "r.json"
        code = main(
            [
                "ask", "--graph", str(graph_json), "--question", "how many?",
                "--llm", f"scripted:{script}", "--templates", str(cfg),
                "--record", str(record),
            ]
        )
        assert code == 0
        doc = json.loads(record.read_text(encoding="utf-8"))
        assert doc["answer"] == 1


class TestConvert:
    def test_text_to_json_and_back(self, tmp_path, capsys):
        text_path = tmp_path / "g.txt"
        text_path.write_text(GRAPH_TEXT, encoding="utf-8")
        json_path = tmp_path / "g.json"
        assert main(["convert", "--in", str(text_path), "--out", str(json_path)]) == 0
        back_path = tmp_path / "back.txt"
        assert main(["convert", "--in", str(json_path), "--out", str(back_path)]) == 0
        g1 = parse_graph_text(GRAPH_TEXT)
        g2 = parse_graph_text(back_path.read_text(encoding="utf-8").strip())
        assert g1 == g2

    def test_missing_input(self, capsys):
        assert main(["convert", "--in", "/nope", "--out", "x.json"]) == 2


class TestGen:
    def test_deterministic_outputs(self, tmp_path, capsys):
        args = [
            "gen", "--task", "shortest_path", "--min", "2", "--max", "20",
            "--count", "5", "--seed", "1",
        ]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        assert main(args + ["--out", str(tmp_path / "b")]) == 0
        a = (tmp_path / "a" / "manifest.json").read_bytes()
        b = (tmp_path / "b" / "manifest.json").read_bytes()
        assert a == b

    def test_infeasible_spec_exits_2(self, tmp_path, capsys):
        code = main(
            [
                "gen", "--task", "max_triangle_sum", "--min", "2", "--max", "2",
                "--count", "1", "--out", str(tmp_path / "x"),
            ]
        )
        assert code == 2

    def test_unknown_task_exits_64(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["gen", "--task", "hamilton", "--out", str(tmp_path / "x")])
        assert exc.value.code == 64


class TestBenchAndReport:
    def test_golden_bench_on_dataset(self, tmp_path, capsys):
        data_dir = tmp_path / "data"
        assert main(
            [
                "gen", "--task", "connectivity", "--min", "2", "--max", "15",
                "--count", "4", "--seed", "3", "--out", str(data_dir),
            ]
        ) == 0
        report_path = tmp_path / "report.json"
        csv_path = tmp_path / "report.csv"
        code = main(
            [
                "bench", "--dataset", str(data_dir), "--golden",
                "--out", str(report_path), "--csv", str(csv_path),
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "connectivity" in out
        assert "100.0%" in out
        doc = json.loads(report_path.read_text(encoding="utf-8"))
        assert doc["per_task"]["connectivity"]["accuracy"] == 1.0
        header = csv_path.read_text(encoding="utf-8").splitlines()[0]
        assert header == (
            "qid,task,size,correct,attempts,fallback,err_kind,"
            "in_tokens,out_tokens,wall_ms"
        )

    def test_report_conversion(self, tmp_path, capsys):
        data_dir = tmp_path / "data"
        main(
            [
                "gen", "--task", "indegree", "--min", "2", "--max", "10",
                "--count", "3", "--seed", "2", "--out", str(data_dir),
            ]
        )
        report_path = tmp_path / "r.json"
        main(
            [
                "bench", "--dataset", str(data_dir), "--golden",
                "--out", str(report_path),
            ]
        )
        capsys.readouterr()
        out_csv = tmp_path / "out.csv"
        code = main(
            ["report", "--in", str(report_path), "--out", str(out_csv)]
        )
        assert code == 0
        lines = out_csv.read_text(encoding="utf-8").strip().splitlines()
        assert len(lines) == 4  # header + 3 rows

    def test_bench_requires_mode(self, tmp_path, capsys):
        code = main(["bench", "--all-tasks"])
        assert code == 64

    def test_missing_dataset_exits_2(self, capsys):
        code = main(["bench", "--dataset", "/nope", "--golden"])
        assert code == 2
