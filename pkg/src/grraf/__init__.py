"""Graph reasoning via generated code queries over stored graphs."""

from .graphs import (
    DIALECT_JSON,
    DIALECT_PROSE,
    Edge,
    GraphError,
    GraphParseError,
    GraphSchema,
    GraphStore,
    GraphValidationError,
    PropertyGraph,
    extract_schema,
    graph_from_edges,
    load_graph_file,
    parse_graph_text,
    serialize,
)
from .oracles import TaskKind, check_answer, solve
from .llm import (
    ChatMessage,
    LiveLLM,
    LLMClient,
    ScriptedLLM,
    TokenUsage,
    extract_code,
)
from .graphscript import (
    GraphScriptError,
    GraphScriptRuntimeError,
    GraphScriptSyntaxError,
    GraphScriptTimeout,
    compile_script,
    eval_graph_script,
)
from .executor import (
    BackendUnavailableError,
    ExecStatus,
    ExecutionResult,
    execute,
    execute_embedded,
    execute_external,
)
from .pipeline import (
    AnswerRecord,
    CodeArtifact,
    Pipeline,
    PipelineConfig,
    QuestionSpec,
)
from .golden import golden_source
from .bench import (
    BenchReport,
    Dataset,
    DatasetSpec,
    gen_dataset,
    run_benchmark,
    sweep,
    token_curve,
)

__version__ = "0.1.0"

__all__ = [
    "AnswerRecord",
    "BackendUnavailableError",
    "BenchReport",
    "ChatMessage",
    "CodeArtifact",
    "Dataset",
    "DatasetSpec",
    "DIALECT_JSON",
    "DIALECT_PROSE",
    "Edge",
    "ExecStatus",
    "ExecutionResult",
    "GraphError",
    "GraphParseError",
    "GraphSchema",
    "GraphScriptError",
    "GraphScriptRuntimeError",
    "GraphScriptSyntaxError",
    "GraphScriptTimeout",
    "GraphStore",
    "GraphValidationError",
    "LiveLLM",
    "LLMClient",
    "Pipeline",
    "PipelineConfig",
    "PropertyGraph",
    "QuestionSpec",
    "ScriptedLLM",
    "TaskKind",
    "TokenUsage",
    "check_answer",
    "compile_script",
    "eval_graph_script",
    "execute",
    "execute_embedded",
    "execute_external",
    "extract_code",
    "extract_schema",
    "gen_dataset",
    "golden_source",
    "graph_from_edges",
    "load_graph_file",
    "parse_graph_text",
    "run_benchmark",
    "serialize",
    "solve",
    "sweep",
    "token_curve",
]
