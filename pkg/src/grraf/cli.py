"""Command-line front door.

Subcommands: ``ask`` (answer one question end to end), ``convert``
(plain-text dialect <-> canonical JSON), ``gen`` (seeded datasets),
``bench`` (benchmark runs and golden-code mode), ``report`` (report
format conversion).  Every subcommand is non-interactive; with a
scripted model backend identical invocations produce identical output.

Exit codes: 0 success (including fallback answers), 2 missing files or
configuration problems, 64 usage errors, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import (
    DESK_SCALE_INSTANCE_COUNT,
    Dataset,
    DatasetSpec,
    GenerationError,
    format_summary,
    gen_dataset,
    merge_reports,
    run_benchmark,
    write_report_csv,
    write_report_json,
)
from .executor import BackendUnavailableError
from .graphs import (
    DIALECT_JSON,
    DIALECT_PROSE,
    GraphError,
    GraphStore,
    load_graph_file,
    parse_graph_text,
    serialize,
)
from .llm import LiveLLM, LLMError, ScriptedLLM
from .oracles import TaskKind
from .pipeline import Pipeline, PipelineConfig, QuestionSpec

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 64, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_CONFIG):
        super().__init__(message)
        self.code = code


def _parse_density(text: str):
    parts = text.split(",")
    if len(parts) == 1:
        return float(parts[0])
    if len(parts) == 2:
        return (float(parts[0]), float(parts[1]))
    raise argparse.ArgumentTypeError("density must be NUM or LO,HI")


def _parse_task(text: str) -> TaskKind:
    try:
        return TaskKind(text)
    except ValueError:
        choices = ", ".join(t.value for t in TaskKind)
        raise argparse.ArgumentTypeError(
            f"unknown task {text!r} (choose from: {choices})"
        )


def _build_parser() -> _Parser:
    parser = _Parser(prog="grraf", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    ask = sub.add_parser("ask", help="answer one graph question end to end")
    ask.add_argument("--graph", required=True, help="graph file (.json or text)")
    ask.add_argument("--question", required=True)
    ask.add_argument("--task", type=_parse_task, default=None,
                     help="optional task hint for fallback parsing")
    ask.add_argument("--backend", choices=["embedded", "external"],
                     default="embedded")
    ask.add_argument("--t", type=float, default=300.0, dest="time_limit_s",
                     help="execution time limit in seconds (default 300)")
    ask.add_argument("--n", type=int, default=3, dest="max_iterations",
                     help="max repair iterations (default 3)")
    ask.add_argument("--llm", default="live",
                     help="'live' or 'scripted:FILE' (JSON list of responses)")
    ask.add_argument("--templates", default=None,
                     help="JSON config file with prompt templates")
    ask.add_argument("--record", default=None,
                     help="write the full answer record JSON here")
    ask.add_argument("--shim-cmd", default=None,
                     help="sandbox shim command for the external backend")

    convert = sub.add_parser("convert", help="convert between graph dialects")
    convert.add_argument("--in", dest="infile", required=True)
    convert.add_argument("--out", dest="outfile", required=True)

    gen = sub.add_parser("gen", help="generate a seeded dataset")
    gen.add_argument("--task", type=_parse_task, required=True)
    gen.add_argument("--min", type=int, default=None, dest="min_nodes")
    gen.add_argument("--max", type=int, default=None, dest="max_nodes")
    gen.add_argument("--count", type=int, default=DESK_SCALE_INSTANCE_COUNT)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--density", type=_parse_density, default=(0.05, 0.35))
    gen.add_argument("--out", required=True, help="output dataset directory")

    bench = sub.add_parser("bench", help="run a benchmark")
    source = bench.add_mutually_exclusive_group(required=True)
    source.add_argument("--dataset", help="dataset directory from 'gen'")
    source.add_argument("--all-tasks", action="store_true",
                        help="generate desk-scale datasets for every task")
    bench.add_argument("--golden", action="store_true",
                       help="replace generated code with verified programs")
    bench.add_argument("--llm", default=None,
                       help="'scripted:FILE' with {\"script\": [...]}")
    bench.add_argument("--count", type=int, default=DESK_SCALE_INSTANCE_COUNT,
                       help="instances per task for --all-tasks")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--t", type=float, default=300.0, dest="time_limit_s")
    bench.add_argument("--n", type=int, default=3, dest="max_iterations")
    bench.add_argument("--parallelism", type=int, default=1)
    bench.add_argument("--out", default=None, help="report JSON path")
    bench.add_argument("--csv", default=None, help="plot-ready CSV path")

    report = sub.add_parser("report", help="convert a saved report")
    report.add_argument("--in", dest="infile", required=True)
    report.add_argument("--format", choices=["csv"], default="csv")
    report.add_argument("--out", default=None, help="default: stdout")

    return parser


def _make_llm(spec: str, config_doc: dict | None = None):
    if spec == "live":
        llm_doc = (config_doc or {}).get("llm", {})
        if llm_doc.get("endpoint"):
            return LiveLLM(
                llm_doc["endpoint"],
                api_key=llm_doc.get("api_key", ""),
                model=llm_doc.get("model", "default"),
            )
        try:
            return LiveLLM.from_env()
        except LLMError as exc:
            raise CliError(f"live backend not configured: {exc}")
    if spec.startswith("scripted:"):
        path = Path(spec.split(":", 1)[1])
        if not path.is_file():
            raise CliError(f"scripted response file not found: {path}")
        doc = json.loads(path.read_text(encoding="utf-8"))
        script = doc["script"] if isinstance(doc, dict) else doc
        if not isinstance(script, list):
            raise CliError(f"{path} must hold a JSON list or {{'script': [...]}}")
        return ScriptedLLM([str(s) for s in script])
    raise CliError(f"unknown --llm value {spec!r}", EXIT_USAGE)


def _cmd_ask(args) -> int:
    graph_path = Path(args.graph)
    if not graph_path.is_file():
        raise CliError(f"graph file not found: {graph_path}")
    try:
        graph = load_graph_file(graph_path)
    except GraphError as exc:
        raise CliError(f"cannot parse graph {graph_path}: {exc}")
    store = GraphStore()
    store.add(graph_path.name, graph)
    config_doc = None
    if args.templates:
        config_doc = json.loads(Path(args.templates).read_text(encoding="utf-8"))
    llm = _make_llm(args.llm, config_doc)
    cfg_kwargs = dict(
        time_limit_s=args.time_limit_s,
        max_iterations=args.max_iterations,
        backend=args.backend,
        shim_cmd=args.shim_cmd.split() if args.shim_cmd else None,
    )
    if args.templates:
        cfg = PipelineConfig.from_file(args.templates, **cfg_kwargs)
    else:
        cfg = PipelineConfig(**cfg_kwargs)
    pipeline = Pipeline(llm, store, cfg)
    question = QuestionSpec(args.question, graph_path.name, task_hint=args.task)
    try:
        record = pipeline.run(question)
    except (LLMError, BackendUnavailableError) as exc:
        raise CliError(str(exc))
    print(record.naturalized)
    if args.record:
        Path(args.record).write_text(
            json.dumps(record.to_json_dict(), sort_keys=True, indent=1),
            encoding="utf-8",
        )
    return EXIT_OK


def _cmd_convert(args) -> int:
    src = Path(args.infile)
    if not src.is_file():
        raise CliError(f"input file not found: {src}")
    in_dialect = DIALECT_JSON if src.suffix == ".json" else DIALECT_PROSE
    out = Path(args.outfile)
    out_dialect = DIALECT_JSON if out.suffix == ".json" else DIALECT_PROSE
    try:
        g = parse_graph_text(src.read_text(encoding="utf-8"), in_dialect)
    except GraphError as exc:
        raise CliError(f"cannot parse {src}: {exc}")
    out.write_text(serialize(g, out_dialect) + "\n", encoding="utf-8")
    print(f"wrote {out} ({g.node_count} nodes, {g.edge_count} edges)")
    return EXIT_OK


def _dataset_spec_from_args(args, task: TaskKind, count: int) -> DatasetSpec:
    node_range = None
    if args.min_nodes is not None or args.max_nodes is not None:
        lo = args.min_nodes if args.min_nodes is not None else 2
        hi = args.max_nodes if args.max_nodes is not None else max(lo, 2)
        node_range = (lo, hi)
    return DatasetSpec(
        task=task,
        node_range=node_range,
        instance_count=count,
        edge_density=args.density,
        seed=args.seed,
    )


def _cmd_gen(args) -> int:
    spec = _dataset_spec_from_args(args, args.task, args.count)
    try:
        dataset = gen_dataset(spec)
    except GenerationError as exc:
        raise CliError(str(exc))
    dataset.save(args.out)
    print(
        f"wrote {len(dataset)} {args.task.value} instances to {args.out} "
        f"(seed {args.seed})"
    )
    return EXIT_OK


def _cmd_bench(args) -> int:
    if not args.golden and not args.llm:
        raise CliError("bench needs --golden or --llm scripted:FILE", EXIT_USAGE)
    cfg = PipelineConfig(
        time_limit_s=args.time_limit_s, max_iterations=args.max_iterations
    )
    if args.dataset:
        if not (Path(args.dataset) / "manifest.json").is_file():
            raise CliError(f"no dataset manifest under {args.dataset}")
        datasets = [Dataset.load(args.dataset)]
    else:
        datasets = []
        for task in TaskKind:
            datasets.append(
                gen_dataset(
                    DatasetSpec(
                        task=task, instance_count=args.count, seed=args.seed
                    )
                )
            )

    def factory_for(dataset):
        if args.golden:
            return dict(golden=True)
        llm_spec = args.llm

        def factory(qid):
            return _make_llm(llm_spec)

        return dict(llm_factory=factory, llm_label=llm_spec)

    reports = []
    failure: Exception | None = None
    for dataset in datasets:
        try:
            reports.append(
                run_benchmark(
                    dataset, cfg, parallelism=args.parallelism,
                    **factory_for(dataset),
                )
            )
        except Exception as exc:  # save whatever completed, then fail
            failure = exc
            break
    report = merge_reports(reports) if reports else None
    if report is not None:
        if args.out:
            write_report_json(report, args.out)
        if args.csv:
            write_report_csv(report.rows, args.csv)
        print(format_summary(report))
    if failure is not None:
        print(f"bench aborted: {failure}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def _cmd_report(args) -> int:
    src = Path(args.infile)
    if not src.is_file():
        raise CliError(f"report file not found: {src}")
    doc = json.loads(src.read_text(encoding="utf-8"))
    rows = doc.get("rows", [])
    if args.out:
        write_report_csv(rows, args.out)
        print(f"wrote {args.out} ({len(rows)} rows)")
    else:
        from .bench import CSV_COLUMNS

        print(",".join(CSV_COLUMNS))
        for row in rows:
            print(
                ",".join(
                    str(int(row[c]) if c in ("correct", "fallback") else row[c])
                    for c in CSV_COLUMNS
                )
            )
    return EXIT_OK


_COMMANDS = {
    "ask": _cmd_ask,
    "convert": _cmd_convert,
    "gen": _cmd_gen,
    "bench": _cmd_bench,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(f"grraf: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
