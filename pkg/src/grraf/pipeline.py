"""Question-answering control flow over a stored graph.

A run refines the user prompt, asks the model for a generic code
template, extracts the graph schema, asks for final executable code,
and then executes that code under a time limit.  Execution errors and
time-outs are fed back to the model for repair at most
``max_iterations`` times; after that one direct-answer call on the
original question is made instead (the fallback), and the raw answer is
finally rewritten as a plain-language sentence.

The graph itself is never placed in any prompt: prompts carry only the
graph's name and extracted schema, which keeps token cost independent
of graph size.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Sequence

from .executor import (
    BACKEND_EMBEDDED,
    BACKEND_EXTERNAL,
    ExecStatus,
    ExecutionResult,
    execute,
)
from .graphs import GraphSchema, GraphStore, PropertyGraph, extract_schema
from .llm import (
    ChatExchange,
    ChatMessage,
    LLMClient,
    TokenUsage,
    TransportError,
    extract_code,
)
from .oracles import TaskKind

EVENT_ERROR = "execution-error"
EVENT_TIMEOUT = "time-out"

KIND_TEMPLATE = "template"
KIND_FINAL = "final"

EMBEDDED_LANGUAGE_NOTES = (
    "Write one program in the embedded graph-script language "
    "(statements per line; if/then/end, while/do/end, for/in/do/end; "
    "graph primitives node_count(), nodes(), neighbors(v), in_neighbors(v), "
    "edges(), edge_weight(u,v), edge_capacity(u,v), has_edge(u,v), "
    "indegree(v), outdegree(v), node_weight(v); collections list(), "
    "queue(), set(), map(), heap()). The program must finish with "
    "`return <answer>`."
)

EXTERNAL_LANGUAGE_NOTES = (
    "Write one Python script. The target graph is already loaded as the "
    "variable G (a networkx graph object). Assign the final answer to a "
    "variable named result."
)

DEFAULT_TEMPLATES: dict[str, str] = {
    "refine": (
        "Rewrite the following question about the stored graph "
        "'{graph_name}' so it is precise and unambiguous. Keep every node "
        "id and requirement; drop redundant wording. Reply with the "
        "rewritten question only.\n\nQuestion: {prompt}"
    ),
    "code_template": (
        "Write a generic code sketch for answering this kind of question: "
        "{refined}\n\nDo not reference specific node ids, property names, "
        "or the stored graph; keep it algorithm-only."
    ),
    "final_code": (
        "Question: {refined}\n\nGeneric sketch:\n{template_code}\n\n"
        "The target graph is stored under the name '{graph_name}'. "
        "Schema: {schema}.\n\n{language_notes}\n\n"
        "Produce the final executable code for this question."
    ),
    "repair_error": (
        "The previous program failed with this error:\n{error}\n\n"
        "Previous program:\n{code}\n\n{language_notes}\n\n"
        "Return a corrected program."
    ),
    "repair_timeout": (
        "The previous program was stopped because it exceeded the time "
        "limit of {time_limit_s} seconds (it ran for {elapsed_s} seconds). "
        "Rewrite it so that it runs faster.\n\nPrevious program:\n{code}\n\n"
        "{language_notes}"
    ),
    "fallback": (
        "{prompt}\n\nAnswer the question directly and concisely."
    ),
    "naturalize": (
        "Question: {prompt}\nComputed answer: {answer}\n\n"
        "State the answer as one plain, reader-friendly sentence."
    ),
}


@dataclass(frozen=True)
class QuestionSpec:
    prompt: str
    graph_ref: str
    task_hint: TaskKind | None = None


@dataclass
class PipelineConfig:
    time_limit_s: float = 300.0
    max_iterations: int = 3
    backend: str = BACKEND_EMBEDDED
    templates: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_TEMPLATES))
    shim_cmd: Sequence[str] | None = None

    def __post_init__(self) -> None:
        if self.time_limit_s <= 0:
            raise ValueError("time_limit_s must be positive")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")
        if self.backend not in (BACKEND_EMBEDDED, BACKEND_EXTERNAL):
            raise ValueError(f"unknown backend {self.backend!r}")
        merged = dict(DEFAULT_TEMPLATES)
        merged.update(self.templates)
        self.templates = merged

    @property
    def language_notes(self) -> str:
        if self.backend == BACKEND_EXTERNAL:
            return EXTERNAL_LANGUAGE_NOTES
        return EMBEDDED_LANGUAGE_NOTES

    def template_fingerprint(self) -> str:
        blob = json.dumps(sorted(self.templates.items())).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "PipelineConfig":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        kwargs: dict[str, Any] = {}
        if "time_limit_s" in doc:
            kwargs["time_limit_s"] = float(doc["time_limit_s"])
        if "max_iterations" in doc:
            kwargs["max_iterations"] = int(doc["max_iterations"])
        if "backend" in doc:
            kwargs["backend"] = doc["backend"]
        if "templates" in doc:
            kwargs["templates"] = dict(doc["templates"])
        kwargs.update(overrides)
        return cls(**kwargs)


@dataclass
class CodeArtifact:
    kind: str
    source: str
    iteration: int
    provenance: int  # index into the run's exchange list


@dataclass
class LoopEvent:
    kind: str  # EVENT_ERROR | EVENT_TIMEOUT
    message: str


@dataclass
class AnswerRecord:
    question: QuestionSpec
    answer: Any
    naturalized: str
    attempts: int
    fallback_used: bool
    loop_events: list[LoopEvent]
    usage: TokenUsage
    wall_time_s: float
    naturalized_fallback: bool = False
    exchanges: list[ChatExchange] = field(default_factory=list, repr=False)

    def to_json_dict(self) -> dict:
        return {
            "question": {
                "prompt": self.question.prompt,
                "graph_ref": self.question.graph_ref,
                "task_hint": (
                    self.question.task_hint.value
                    if self.question.task_hint
                    else None
                ),
            },
            "answer": answer_to_jsonable(self.answer),
            "naturalized": self.naturalized,
            "attempts": self.attempts,
            "fallback_used": self.fallback_used,
            "loop_events": [
                {"kind": e.kind, "message": e.message} for e in self.loop_events
            ],
            "usage": {
                "input_tokens": self.usage.input_tokens,
                "output_tokens": self.usage.output_tokens,
            },
            "wall_time_s": self.wall_time_s,
            "naturalized_fallback": self.naturalized_fallback,
        }


# -- answer value <-> JSON -----------------------------------------------------

_FRACTION_RE = re.compile(r"^-?\d+/\d+$")


def answer_to_jsonable(value: Any) -> Any:
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (list, tuple)):
        return [answer_to_jsonable(v) for v in value]
    return str(value)


def answer_from_jsonable(value: Any) -> Any:
    if isinstance(value, str) and _FRACTION_RE.match(value):
        return Fraction(value)
    if isinstance(value, list):
        return [answer_from_jsonable(v) for v in value]
    return value


def render_answer(value: Any) -> str:
    """Deterministic plain rendering of a raw answer value."""
    if value is None:
        return "no answer"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(render_answer(v) for v in value) + "]"
    return str(value)


# -- lenient parsing of direct answers ------------------------------------------

_INT_RE = re.compile(r"-?\d+")
_NUMBER_RE = re.compile(r"-?\d+(?:/\d+|\.\d+)?")
_SEQ_RE = re.compile(r"\[\s*-?\d+(?:\s*(?:,|->)\s*-?\d+)*\s*\]")
_ARROW_RE = re.compile(r"-?\d+(?:\s*->\s*-?\d+)+")
_TRUE_RE = re.compile(r"\b(yes|true)\b", re.IGNORECASE)
_FALSE_RE = re.compile(r"\b(no|false)\b", re.IGNORECASE)


def _parse_node_sequence(text: str) -> list[int] | None:
    m = _SEQ_RE.search(text)
    if m:
        return [int(x) for x in _INT_RE.findall(m.group())]
    m = _ARROW_RE.search(text)
    if m:
        return [int(x) for x in _INT_RE.findall(m.group())]
    return None


def parse_answer_text(task: TaskKind | None, text: str) -> Any:
    """Best-effort extraction of an answer value from free text.

    Used for fallback responses only; returns the raw text when nothing
    matching the task's answer shape is found (such answers are simply
    judged incorrect downstream).
    """
    if task is None:
        return text
    if task in (
        TaskKind.CYCLE_DETECTION,
        TaskKind.CONNECTIVITY,
        TaskKind.BIPARTITE_CHECK,
        TaskKind.SUBGRAPH_MATCHING,
    ):
        t = _TRUE_RE.search(text)
        f = _FALSE_RE.search(text)
        if t and (not f or t.start() < f.start()):
            return True
        if f:
            return False
        return text
    if task in (TaskKind.INDEGREE, TaskKind.OUTDEGREE):
        m = _INT_RE.search(text)
        return int(m.group()) if m else text
    if task in (TaskKind.MAX_FLOW, TaskKind.MAX_TRIANGLE_SUM):
        m = _NUMBER_RE.search(text)
        return Fraction(m.group()) if m else text
    if task is TaskKind.TOPOLOGICAL_SORT:
        seq = _parse_node_sequence(text)
        return seq if seq is not None else text
    if task is TaskKind.SHORTEST_PATH:
        seq = _parse_node_sequence(text)
        return seq if seq is not None else text
    return text


# -- the pipeline ---------------------------------------------------------------

class Pipeline:
    """One pipeline instance answers one question at a time."""

    def __init__(
        self,
        llm: LLMClient,
        store: GraphStore,
        config: PipelineConfig | None = None,
        final_code_provider=None,
    ):
        self.llm = llm
        self.store = store
        self.config = config or PipelineConfig()
        # golden-code hook: when set, code-producing LLM stages are skipped
        # and this callable supplies the final program source directly
        self.final_code_provider = final_code_provider
        self.exchanges: list[ChatExchange] = []

    # -- single LLM exchange -----------------------------------------------

    def _exchange(self, user_text: str) -> str:
        messages = [ChatMessage("user", user_text)]
        response, usage = self.llm.complete(messages)
        self.exchanges.append(ChatExchange(tuple(messages), response, usage))
        return response

    def _template(self, name: str, **values) -> str:
        return self.config.templates[name].format(**values)

    # -- stages --------------------------------------------------------------

    def refine_prompt(self, prompt: str, graph_name: str) -> str:
        if not prompt.strip():
            raise ValueError("prompt must be non-empty")
        return self._exchange(
            self._template("refine", prompt=prompt, graph_name=graph_name)
        ).strip()

    def generate_template(self, refined: str) -> CodeArtifact:
        if not refined.strip():
            raise ValueError("refined prompt must be non-empty")
        response = self._exchange(
            self._template("code_template", refined=refined)
        )
        return CodeArtifact(
            kind=KIND_TEMPLATE,
            source=extract_code(response),
            iteration=0,
            provenance=len(self.exchanges) - 1,
        )

    def generate_final_code(
        self,
        refined: str,
        template: CodeArtifact,
        schema: GraphSchema,
        graph_name: str,
    ) -> CodeArtifact:
        response = self._exchange(
            self._template(
                "final_code",
                refined=refined,
                template_code=template.source,
                graph_name=graph_name,
                schema=schema.describe(),
                language_notes=self.config.language_notes,
            )
        )
        return CodeArtifact(
            kind=KIND_FINAL,
            source=extract_code(response),
            iteration=0,
            provenance=len(self.exchanges) - 1,
        )

    def naturalize_answer(self, question: QuestionSpec, answer: Any) -> tuple[str, bool]:
        """Reader-friendly restatement; falls back to a deterministic
        rendering when the backend transport fails."""
        rendered = render_answer(answer)
        try:
            text = self._exchange(
                self._template(
                    "naturalize", prompt=question.prompt, answer=rendered
                )
            )
            return text.strip(), False
        except TransportError:
            return rendered, True

    # -- execution ------------------------------------------------------------

    def _execute(self, code: CodeArtifact, graph: PropertyGraph, ref: str) -> ExecutionResult:
        cfg = self.config
        if cfg.backend == BACKEND_EXTERNAL:
            return execute(
                code.source,
                graph_path=self.store.path_for(ref),
                time_limit_s=cfg.time_limit_s,
                backend=BACKEND_EXTERNAL,
                shim_cmd=cfg.shim_cmd,
            )
        return execute(
            code.source,
            graph=graph,
            time_limit_s=cfg.time_limit_s,
            backend=BACKEND_EMBEDDED,
        )

    # -- full run ---------------------------------------------------------------

    def run(self, question: QuestionSpec) -> AnswerRecord:
        cfg = self.config
        start = time.monotonic()
        self.exchanges = []
        graph = self.store.load(question.graph_ref)
        schema = extract_schema(graph)

        provider = self.final_code_provider
        if provider is None:
            refined = self.refine_prompt(question.prompt, question.graph_ref)
            template = self.generate_template(refined)
            code = self.generate_final_code(
                refined, template, schema, question.graph_ref
            )
        else:
            refined = question.prompt
            code = CodeArtifact(
                kind=KIND_FINAL, source=provider(), iteration=0, provenance=-1
            )

        loop_events: list[LoopEvent] = []
        attempts = 0
        fallback_used = False
        answer: Any = None

        while True:
            attempts += 1
            result = self._execute(code, graph, question.graph_ref)
            if result.status is ExecStatus.OK:
                answer = result.answer
                break
            if result.status is ExecStatus.TIMEOUT:
                loop_events.append(
                    LoopEvent(
                        EVENT_TIMEOUT,
                        f"time limit of {cfg.time_limit_s}s exceeded "
                        f"after {result.wall_time_s:.3f}s",
                    )
                )
            else:
                loop_events.append(LoopEvent(EVENT_ERROR, result.error_message))

            repairs_done = attempts - 1
            if repairs_done < cfg.max_iterations:
                if provider is None:
                    if result.status is ExecStatus.TIMEOUT:
                        prompt = self._template(
                            "repair_timeout",
                            time_limit_s=cfg.time_limit_s,
                            elapsed_s=f"{result.wall_time_s:.3f}",
                            code=code.source,
                            language_notes=cfg.language_notes,
                        )
                    else:
                        prompt = self._template(
                            "repair_error",
                            error=result.error_message,
                            code=code.source,
                            language_notes=cfg.language_notes,
                        )
                    response = self._exchange(prompt)
                    code = CodeArtifact(
                        kind=KIND_FINAL,
                        source=extract_code(response),
                        iteration=code.iteration + 1,
                        provenance=len(self.exchanges) - 1,
                    )
                else:
                    code = CodeArtifact(
                        kind=KIND_FINAL,
                        source=provider(),
                        iteration=code.iteration + 1,
                        provenance=-1,
                    )
                continue
            # iteration budget exhausted: answer the original question directly
            fallback_used = True
            if provider is None:
                response = self._exchange(
                    self._template("fallback", prompt=question.prompt)
                )
                answer = parse_answer_text(question.task_hint, response)
            else:
                answer = None
            break

        if provider is None:
            naturalized, nat_fallback = self.naturalize_answer(question, answer)
        else:
            naturalized, nat_fallback = render_answer(answer), False

        usage = TokenUsage()
        for exchange in self.exchanges:
            usage = usage + exchange.usage

        return AnswerRecord(
            question=question,
            answer=answer,
            naturalized=naturalized,
            attempts=attempts,
            fallback_used=fallback_used,
            loop_events=loop_events,
            usage=usage,
            wall_time_s=time.monotonic() - start,
            naturalized_fallback=nat_fallback,
            exchanges=list(self.exchanges),
        )
