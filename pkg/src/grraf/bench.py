"""Dataset generation, benchmark runs, and report aggregation.

Datasets are generated per task with seeded RNG so identical specs give
byte-identical files.  Instances are rejection-sampled until the
question is well posed for its task (a DAG for ordering, a reachable
pair for path questions, at least one triangle for the triangle task,
and so on), and ground truth always comes from the reference oracles.

``run_benchmark`` drives the full pipeline per question, judging
answers with the task-aware checker (never by comparing naturalized
text).  Golden-code mode swaps the model-generated final program for
the shipped verified program, isolating pipeline and executor behavior
from any model.
"""

from __future__ import annotations

import csv
import json
import random
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

from .golden import golden_source
from .graphs import (
    DIALECT_JSON,
    GraphStore,
    PropertyGraph,
    graph_from_edges,
    parse_graph_text,
    serialize,
)
from .llm import LLMClient
from .oracles import TaskKind, check_answer, solve
from .pipeline import (
    AnswerRecord,
    Pipeline,
    PipelineConfig,
    QuestionSpec,
    answer_from_jsonable,
    answer_to_jsonable,
)

#: Default node-size range per task.
TASK_NODE_RANGES: dict[TaskKind, tuple[int, int]] = {
    TaskKind.CYCLE_DETECTION: (2, 100),
    TaskKind.CONNECTIVITY: (2, 100),
    TaskKind.BIPARTITE_CHECK: (2, 100),
    TaskKind.TOPOLOGICAL_SORT: (2, 50),
    TaskKind.SHORTEST_PATH: (2, 100),
    TaskKind.MAX_TRIANGLE_SUM: (2, 25),
    TaskKind.MAX_FLOW: (2, 50),
    TaskKind.SUBGRAPH_MATCHING: (2, 30),
    TaskKind.INDEGREE: (2, 50),
    TaskKind.OUTDEGREE: (2, 50),
}

DEFAULT_INSTANCE_COUNT = 400
DESK_SCALE_INSTANCE_COUNT = 50

PROMPTS: dict[TaskKind, str] = {
    TaskKind.CYCLE_DETECTION: "Does the graph '{g}' contain a cycle?",
    TaskKind.CONNECTIVITY: (
        "Is there a path between node {u} and node {v} in the graph '{g}'?"
    ),
    TaskKind.BIPARTITE_CHECK: "Is the graph '{g}' bipartite?",
    TaskKind.TOPOLOGICAL_SORT: (
        "Give a valid topological ordering of the directed graph '{g}'."
    ),
    TaskKind.SHORTEST_PATH: (
        "What is the shortest path from node {src} to node {dst} "
        "in the graph '{g}'?"
    ),
    TaskKind.MAX_TRIANGLE_SUM: (
        "What is the maximum sum of node weights over any three mutually "
        "adjacent nodes in the graph '{g}'?"
    ),
    TaskKind.MAX_FLOW: (
        "What is the maximum flow from node {s} to node {t} in the "
        "directed graph '{g}'?"
    ),
    TaskKind.SUBGRAPH_MATCHING: (
        "Does the graph '{g}' contain a subgraph isomorphic to the "
        "pattern graph '{p}'?"
    ),
    TaskKind.INDEGREE: (
        "What is the indegree of node {v} in the directed graph '{g}'?"
    ),
    TaskKind.OUTDEGREE: (
        "What is the outdegree of node {v} in the directed graph '{g}'?"
    ),
}


class GenerationError(Exception):
    """The dataset spec cannot produce well-posed instances."""


@dataclass(frozen=True)
class DatasetSpec:
    task: TaskKind
    node_range: tuple[int, int] | None = None
    instance_count: int = DEFAULT_INSTANCE_COUNT
    edge_density: float | tuple[float, float] = (0.05, 0.35)
    seed: int = 0

    def resolved_range(self) -> tuple[int, int]:
        lo, hi = self.node_range or TASK_NODE_RANGES[self.task]
        if self.task is TaskKind.MAX_TRIANGLE_SUM:
            lo = max(lo, 3)
        if lo > hi:
            raise GenerationError(
                f"infeasible node range [{lo}, {hi}] for {self.task.value}"
            )
        return lo, hi


@dataclass
class BenchInstance:
    qid: str
    question: QuestionSpec
    graph_name: str
    size: int
    params: dict[str, Any]
    truth: Any


@dataclass
class Dataset:
    task: TaskKind
    instances: list[BenchInstance]
    store: GraphStore
    spec_echo: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.instances)

    def save(self, directory: str | Path) -> None:
        root = Path(directory)
        graphs_dir = root / "graphs"
        graphs_dir.mkdir(parents=True, exist_ok=True)
        manifest = {"task": self.task.value, "spec": self.spec_echo, "instances": []}
        for inst in self.instances:
            names = [inst.graph_name]
            params_doc = dict(inst.params)
            if "pattern" in params_doc:
                pattern_name = f"{inst.qid}-pattern"
                pattern = params_doc.pop("pattern")
                params_doc["pattern_ref"] = pattern_name
                names.append(pattern_name)
                (graphs_dir / f"{pattern_name}.json").write_text(
                    serialize(pattern, DIALECT_JSON), encoding="utf-8"
                )
            (graphs_dir / f"{inst.graph_name}.json").write_text(
                serialize(self.store.load(inst.graph_name), DIALECT_JSON),
                encoding="utf-8",
            )
            manifest["instances"].append(
                {
                    "qid": inst.qid,
                    "prompt": inst.question.prompt,
                    "graph": inst.graph_name,
                    "size": inst.size,
                    "params": params_doc,
                    "truth": answer_to_jsonable(inst.truth),
                }
            )
        (root / "manifest.json").write_text(
            json.dumps(manifest, sort_keys=True, indent=1), encoding="utf-8"
        )

    @classmethod
    def load(cls, directory: str | Path) -> "Dataset":
        root = Path(directory)
        manifest = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
        task = TaskKind(manifest["task"])
        store = GraphStore(root=root / "graphs")
        instances = []
        for doc in manifest["instances"]:
            graph_name = doc["graph"] + ".json"
            params = dict(doc["params"])
            if "pattern_ref" in params:
                params["pattern"] = store.load(params.pop("pattern_ref") + ".json")
            truth = answer_from_jsonable(doc["truth"])
            if task is TaskKind.SHORTEST_PATH and isinstance(truth, list):
                truth = (truth[0], truth[1])
            instances.append(
                BenchInstance(
                    qid=doc["qid"],
                    question=QuestionSpec(
                        doc["prompt"], graph_name, task_hint=task
                    ),
                    graph_name=graph_name,
                    size=doc["size"],
                    params=params,
                    truth=truth,
                )
            )
        return cls(
            task=task,
            instances=instances,
            store=store,
            spec_echo=manifest.get("spec", {}),
        )


# -- random graph sampling -----------------------------------------------------

def _pick_density(rng: random.Random, density) -> float:
    if isinstance(density, (tuple, list)):
        lo, hi = density
        return rng.uniform(lo, hi)
    return float(density)


def _sample_pairs(
    rng: random.Random, n: int, density: float, directed: bool
) -> list[tuple[int, int]]:
    total = n * (n - 1) if directed else n * (n - 1) // 2
    m = min(total, round(density * total))
    if total <= 200_000:
        if directed:
            population = [(u, v) for u in range(n) for v in range(n) if u != v]
        else:
            population = [(u, v) for u in range(n) for v in range(u + 1, n)]
        return sorted(rng.sample(population, m))
    chosen: set[tuple[int, int]] = set()
    while len(chosen) < m:
        u = rng.randrange(n)
        v = rng.randrange(n)
        if u == v:
            continue
        if not directed and u > v:
            u, v = v, u
        chosen.add((u, v))
    return sorted(chosen)


def _component_of(g: PropertyGraph, start: int) -> set[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in g.neighbors(u):
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def _reachable_from(g: PropertyGraph, start: int) -> set[int]:
    return _component_of(g, start)


# -- per-task instance generation ------------------------------------------------

def _gen_graph_and_params(
    task: TaskKind, rng: random.Random, n: int, density: float
) -> tuple[PropertyGraph, dict[str, Any]]:
    if task is TaskKind.CYCLE_DETECTION:
        if rng.random() < 0.5:
            # random forest: guaranteed acyclic
            edges = []
            for v in range(1, n):
                if rng.random() < 0.7:
                    edges.append((rng.randrange(v), v))
            return graph_from_edges(False, n, edges), {}
        return graph_from_edges(False, n, _sample_pairs(rng, n, density, False)), {}

    if task is TaskKind.CONNECTIVITY:
        if rng.random() < 0.5 or n < 2:
            g = graph_from_edges(False, n, _sample_pairs(rng, n, density, False))
            start = rng.randrange(n)
            comp = sorted(_component_of(g, start))
            v = comp[rng.randrange(len(comp))]
            return g, {"u": start, "v": v}
        # force a disconnected pair by building two unlinked blocks
        n_left = rng.randint(1, n - 1)
        left = _sample_pairs(rng, n_left, density, False)
        right = [
            (u + n_left, v + n_left)
            for (u, v) in _sample_pairs(rng, n - n_left, density, False)
        ]
        g = graph_from_edges(False, n, left + right)
        return g, {
            "u": rng.randrange(n_left),
            "v": n_left + rng.randrange(n - n_left),
        }

    if task is TaskKind.BIPARTITE_CHECK:
        if rng.random() < 0.5:
            side = [rng.random() < 0.5 for _ in range(n)]
            edges = [
                (u, v)
                for (u, v) in _sample_pairs(rng, n, min(1.0, density * 2), False)
                if side[u] != side[v]
            ]
            return graph_from_edges(False, n, edges), {}
        return graph_from_edges(False, n, _sample_pairs(rng, n, density, False)), {}

    if task is TaskKind.TOPOLOGICAL_SORT:
        # orient every sampled undirected pair along a random permutation
        perm = list(range(n))
        rng.shuffle(perm)
        rank = {v: i for i, v in enumerate(perm)}
        edges = [
            (u, v) if rank[u] < rank[v] else (v, u)
            for (u, v) in _sample_pairs(rng, n, density, False)
        ]
        return graph_from_edges(True, n, sorted(edges)), {}

    if task is TaskKind.SHORTEST_PATH:
        pairs = _sample_pairs(rng, n, density, False)
        edges = [(u, v, rng.randint(1, 10)) for u, v in pairs]
        g = graph_from_edges(False, n, edges)
        start = rng.randrange(n)
        comp = sorted(_component_of(g, start))
        dst = comp[rng.randrange(len(comp))]
        return g, {"src": start, "dst": dst}

    if task is TaskKind.MAX_TRIANGLE_SUM:
        pairs = _sample_pairs(rng, n, density, False)
        weights = [rng.randint(1, 20) for _ in range(n)]
        return graph_from_edges(False, n, pairs, weights), {}

    if task is TaskKind.MAX_FLOW:
        pairs = _sample_pairs(rng, n, density, True)
        edges = [(u, v, None, rng.randint(1, 10)) for u, v in pairs]
        g = graph_from_edges(True, n, edges)
        s = rng.randrange(n)
        reachable = sorted(_reachable_from(g, s) - {s})
        if not reachable:
            return g, None  # reject; no sink reachable from this source
        t = reachable[rng.randrange(len(reachable))]
        return g, {"s": s, "t": t}

    if task is TaskKind.SUBGRAPH_MATCHING:
        g = graph_from_edges(
            False, n, _sample_pairs(rng, n, max(density, 0.15), False)
        )
        k = rng.randint(2, min(5, n))
        pattern = graph_from_edges(
            False, k, _sample_pairs(rng, k, rng.uniform(0.4, 0.9), False)
        )
        if rng.random() < 0.5:
            # plant the pattern so positive verdicts stay common
            spots = rng.sample(range(n), k)
            merged = {(e.u, e.v) for e in g.edges}
            for e in pattern.edges:
                u, v = spots[e.u], spots[e.v]
                if u > v:
                    u, v = v, u
                merged.add((u, v))
            g = graph_from_edges(False, n, sorted(merged))
        return g, {"pattern": pattern}

    if task in (TaskKind.INDEGREE, TaskKind.OUTDEGREE):
        g = graph_from_edges(True, n, _sample_pairs(rng, n, density, True))
        return g, {"v": rng.randrange(n)}

    raise GenerationError(f"unknown task {task!r}")


def _well_posed(task: TaskKind, truth: Any) -> bool:
    if task is TaskKind.MAX_TRIANGLE_SUM:
        return truth is not None
    return True


def gen_dataset(spec: DatasetSpec, store: GraphStore | None = None) -> Dataset:
    """Generate a seeded, reproducible dataset with oracle ground truth."""
    if spec.instance_count < 0:
        raise GenerationError("instance_count must be non-negative")
    lo, hi = spec.resolved_range()
    rng = random.Random(spec.seed)
    store = store if store is not None else GraphStore()
    instances: list[BenchInstance] = []
    for index in range(spec.instance_count):
        for attempt in range(200):
            n = rng.randint(lo, hi)
            density = _pick_density(rng, spec.edge_density)
            if task_needs_bumped_density(spec.task, attempt):
                density = min(1.0, density + 0.1 * (attempt // 20))
            g, params = _gen_graph_and_params(spec.task, rng, n, density)
            if params is None:
                continue
            truth = solve(spec.task, g, params)
            if not _well_posed(spec.task, truth):
                continue
            break
        else:
            raise GenerationError(
                f"could not generate a well-posed {spec.task.value} instance "
                f"within the node range [{lo}, {hi}]"
            )
        qid = f"{spec.task.value}-{index:05d}"
        graph_name = f"{qid}-graph"
        store.add(graph_name, g)
        prompt_fields = {"g": graph_name, "p": f"{qid}-pattern", **{
            k: v for k, v in params.items() if not isinstance(v, PropertyGraph)
        }}
        prompt = PROMPTS[spec.task].format(**prompt_fields)
        instances.append(
            BenchInstance(
                qid=qid,
                question=QuestionSpec(prompt, graph_name, task_hint=spec.task),
                graph_name=graph_name,
                size=n,
                params=params,
                truth=truth,
            )
        )
    return Dataset(
        task=spec.task,
        instances=instances,
        store=store,
        spec_echo={
            "task": spec.task.value,
            "node_range": list(spec.resolved_range()),
            "instance_count": spec.instance_count,
            "edge_density": list(spec.edge_density)
            if isinstance(spec.edge_density, (tuple, list))
            else spec.edge_density,
            "seed": spec.seed,
        },
    )


def task_needs_bumped_density(task: TaskKind, attempt: int) -> bool:
    # triangle-free rejections are common at low densities on small graphs
    return task is TaskKind.MAX_TRIANGLE_SUM and attempt >= 20


# -- benchmark runs ---------------------------------------------------------------

@dataclass
class QuestionResult:
    qid: str
    task: str
    size: int
    correct: bool
    attempts: int
    fallback: bool
    err_kind: str  # first loop event kind, or "" for a clean run
    in_tokens: int
    out_tokens: int
    wall_ms: int
    answer: Any = None
    naturalized: str = ""


@dataclass
class TaskSummary:
    task: str
    count: int
    correct: int
    accuracy: float
    error_rate: float
    timeout_rate: float
    clean_rate: float
    fallback_rate: float
    mean_in_tokens: float
    mean_out_tokens: float


@dataclass
class BenchReport:
    rows: list[QuestionResult]
    per_task: dict[str, TaskSummary]
    config_echo: dict[str, Any]

    @property
    def accuracy(self) -> float:
        if not self.rows:
            return 0.0
        return sum(r.correct for r in self.rows) / len(self.rows)

    def to_json_dict(self) -> dict:
        return {
            "config": self.config_echo,
            "per_task": {k: vars(v) for k, v in self.per_task.items()},
            "rows": [
                {**vars(r), "answer": answer_to_jsonable(r.answer)}
                for r in self.rows
            ],
        }


CSV_COLUMNS = (
    "qid", "task", "size", "correct", "attempts", "fallback",
    "err_kind", "in_tokens", "out_tokens", "wall_ms",
)


def _summarize(task: str, rows: Sequence[QuestionResult]) -> TaskSummary:
    count = len(rows)
    if count == 0:
        return TaskSummary(task, 0, 0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    errors = sum(1 for r in rows if r.err_kind == "execution-error")
    timeouts = sum(1 for r in rows if r.err_kind == "time-out")
    clean = sum(1 for r in rows if r.err_kind == "")
    correct = sum(1 for r in rows if r.correct)
    return TaskSummary(
        task=task,
        count=count,
        correct=correct,
        accuracy=correct / count,
        error_rate=errors / count,
        timeout_rate=timeouts / count,
        clean_rate=clean / count,
        fallback_rate=sum(1 for r in rows if r.fallback) / count,
        mean_in_tokens=sum(r.in_tokens for r in rows) / count,
        mean_out_tokens=sum(r.out_tokens for r in rows) / count,
    )


def _judge(instance: BenchInstance, graph: PropertyGraph, record: AnswerRecord) -> bool:
    try:
        return check_answer(
            instance.question.task_hint, graph, instance.params, record.answer
        )
    except ValueError:
        return False


def run_benchmark(
    dataset: Dataset,
    cfg: PipelineConfig | None = None,
    llm_factory: Callable[[str], LLMClient] | None = None,
    golden: bool = False,
    golden_delay_iters: int = 0,
    parallelism: int = 1,
    llm_label: str = "",
) -> BenchReport:
    """Run the pipeline on every instance and aggregate the results.

    Exactly one of ``llm_factory`` / ``golden`` must be provided; golden
    mode substitutes the shipped verified program for the final code and
    performs no model exchanges at all.
    """
    cfg = cfg or PipelineConfig()
    if golden == (llm_factory is not None):
        raise ValueError("provide either llm_factory or golden=True")

    def run_one(instance: BenchInstance) -> tuple[QuestionResult, AnswerRecord]:
        graph = dataset.store.load(instance.graph_name)
        if golden:
            provider = lambda: golden_source(  # noqa: E731
                instance.question.task_hint,
                graph,
                instance.params,
                delay_loop_iters=golden_delay_iters,
            )
            pipeline = Pipeline(
                None, dataset.store, cfg, final_code_provider=provider
            )
        else:
            pipeline = Pipeline(
                llm_factory(instance.qid), dataset.store, cfg
            )
        record = pipeline.run(instance.question)
        row = QuestionResult(
            qid=instance.qid,
            task=instance.question.task_hint.value,
            size=instance.size,
            correct=_judge(instance, graph, record),
            attempts=record.attempts,
            fallback=record.fallback_used,
            err_kind=record.loop_events[0].kind if record.loop_events else "",
            in_tokens=record.usage.input_tokens,
            out_tokens=record.usage.output_tokens,
            wall_ms=int(record.wall_time_s * 1000),
            answer=record.answer,
            naturalized=record.naturalized,
        )
        return row, record

    if parallelism > 1 and len(dataset.instances) > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(run_one, dataset.instances))
    else:
        outcomes = [run_one(inst) for inst in dataset.instances]

    rows = sorted((row for row, _rec in outcomes), key=lambda r: r.qid)
    tasks = sorted({r.task for r in rows})
    per_task = {
        t: _summarize(t, [r for r in rows if r.task == t]) for t in tasks
    }
    return BenchReport(
        rows=rows,
        per_task=per_task,
        config_echo={
            "time_limit_s": cfg.time_limit_s,
            "max_iterations": cfg.max_iterations,
            "backend": cfg.backend,
            "templates": cfg.template_fingerprint(),
            "mode": "golden" if golden else f"llm:{llm_label}",
        },
    )


def merge_reports(reports: Sequence[BenchReport]) -> BenchReport:
    """Combine per-task reports from one configuration into one report."""
    if not reports:
        return BenchReport([], {}, {})
    first = reports[0].config_echo
    for r in reports[1:]:
        if r.config_echo != first:
            raise ValueError("cannot merge reports with different configs")
    rows = sorted(
        (row for r in reports for row in r.rows), key=lambda r: r.qid
    )
    tasks = sorted({r.task for r in rows})
    per_task = {
        t: _summarize(t, [r for r in rows if r.task == t]) for t in tasks
    }
    return BenchReport(rows=rows, per_task=per_task, config_echo=dict(first))


def token_curve(reports: Sequence[BenchReport]) -> list[dict[str, Any]]:
    """Mean token usage grouped by graph size.

    All reports must share one configuration (same templates, same
    model mode); mixing configurations raises ``ValueError``.
    """
    if not reports:
        return []
    first = reports[0].config_echo
    for r in reports[1:]:
        if r.config_echo != first:
            raise ValueError(
                "token_curve requires identical configs across reports"
            )
    by_size: dict[int, list[QuestionResult]] = {}
    for report in reports:
        for row in report.rows:
            by_size.setdefault(row.size, []).append(row)
    table = []
    for size in sorted(by_size):
        rows = by_size[size]
        table.append(
            {
                "size": size,
                "mean_in_tokens": sum(r.in_tokens for r in rows) / len(rows),
                "mean_out_tokens": sum(r.out_tokens for r in rows) / len(rows),
                "questions": len(rows),
            }
        )
    return table


def sweep(
    param: str,
    values: Sequence[Any],
    dataset: Dataset,
    base_cfg: PipelineConfig | None = None,
    llm_factory: Callable[[str], LLMClient] | None = None,
    golden: bool = False,
    golden_delay_iters: int = 0,
    parallelism: int = 1,
) -> list[dict[str, Any]]:
    """One benchmark run per parameter value, identical data and seeds."""
    if not values:
        raise ValueError("sweep needs at least one value")
    if param not in ("t", "n", "backbone"):
        raise ValueError(f"unknown sweep parameter {param!r}")
    base_cfg = base_cfg or PipelineConfig()
    table = []
    for value in values:
        cfg_kwargs = {
            "time_limit_s": base_cfg.time_limit_s,
            "max_iterations": base_cfg.max_iterations,
            "backend": base_cfg.backend,
            "templates": dict(base_cfg.templates),
            "shim_cmd": base_cfg.shim_cmd,
        }
        factory = llm_factory
        label = ""
        if param == "t":
            cfg_kwargs["time_limit_s"] = float(value)
        elif param == "n":
            cfg_kwargs["max_iterations"] = int(value)
        else:
            label, factory = value
        report = run_benchmark(
            dataset,
            PipelineConfig(**cfg_kwargs),
            llm_factory=factory,
            golden=golden and factory is None,
            golden_delay_iters=golden_delay_iters,
            parallelism=parallelism,
            llm_label=label,
        )
        table.append(
            {
                "param": param,
                "value": value if param != "backbone" else label,
                "accuracy": report.accuracy,
                "fallback_rate": (
                    sum(r.fallback for r in report.rows) / len(report.rows)
                    if report.rows
                    else 0.0
                ),
            }
        )
    return table


# -- report files -----------------------------------------------------------------

def write_report_json(report: BenchReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report.to_json_dict(), sort_keys=True, indent=1),
        encoding="utf-8",
    )


def write_report_csv(rows: Sequence[QuestionResult] | Sequence[Mapping], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            doc = vars(row) if isinstance(row, QuestionResult) else row
            writer.writerow(
                [
                    doc["qid"], doc["task"], doc["size"],
                    int(bool(doc["correct"])), doc["attempts"],
                    int(bool(doc["fallback"])), doc["err_kind"],
                    doc["in_tokens"], doc["out_tokens"], doc["wall_ms"],
                ]
            )


def format_summary(report: BenchReport) -> str:
    lines = [
        f"{'task':<22} {'n':>5} {'acc':>7} {'err':>6} {'t/o':>6} "
        f"{'fallback':>9} {'in_tok':>8} {'out_tok':>8}"
    ]
    for task in sorted(report.per_task):
        s = report.per_task[task]
        lines.append(
            f"{task:<22} {s.count:>5} {s.accuracy:>7.1%} {s.error_rate:>6.1%} "
            f"{s.timeout_rate:>6.1%} {s.fallback_rate:>9.1%} "
            f"{s.mean_in_tokens:>8.1f} {s.mean_out_tokens:>8.1f}"
        )
    if report.rows:
        lines.append(f"overall accuracy: {report.accuracy:.1%} "
                     f"({sum(r.correct for r in report.rows)}/{len(report.rows)})")
    else:
        lines.append("empty report")
    return "\n".join(lines)
