"""Deadline-bounded execution of generated code against a graph.

Two backends share one result type: the embedded backend runs programs
in the in-process graph-script interpreter (hermetic, cooperatively
cancelled via instruction metering); the external backend hands the code
to a sandbox shim subprocess over a one-shot JSON protocol and kills the
whole process group at the deadline.

External protocol (UTF-8, single-line JSON on stdin/stdout):

    request:  {"code": str, "graph_path": str, "time_limit_s": number}
    response: {"status": "ok"|"error", "answer": any, "error": str?,
               "wall_time_ms": int}

The shim exits 0 whenever the protocol itself succeeded, regardless of
the script outcome.
"""

from __future__ import annotations

import json
import os
import shlex
import shutil
import signal
import subprocess
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Sequence

from .graphs import PropertyGraph
from .graphscript import (
    GraphScriptError,
    GraphScriptTimeout,
    eval_graph_script,
)

ENV_SHIM_CMD = "GRRAF_SHIM_CMD"
SHIM_EXECUTABLE = "grraf-shim"

BACKEND_EMBEDDED = "embedded"
BACKEND_EXTERNAL = "external"


class BackendUnavailableError(Exception):
    """Backend misconfiguration; distinct from an execution error."""


class ExecStatus(str, Enum):
    OK = "ok"
    ERROR = "execution-error"
    TIMEOUT = "timed-out"


@dataclass
class ExecutionResult:
    status: ExecStatus
    answer: Any = None
    error_message: str | None = None
    wall_time_s: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status is ExecStatus.OK


def execute_embedded(
    source: str, graph: PropertyGraph, time_limit_s: float
) -> ExecutionResult:
    """Run a graph-script program under a wall-clock deadline."""
    start = time.monotonic()
    try:
        value = eval_graph_script(source, graph, time_limit_s=time_limit_s)
    except GraphScriptTimeout:
        return ExecutionResult(
            ExecStatus.TIMEOUT, wall_time_s=time.monotonic() - start
        )
    except GraphScriptError as exc:
        return ExecutionResult(
            ExecStatus.ERROR,
            error_message=str(exc),
            wall_time_s=time.monotonic() - start,
        )
    return ExecutionResult(
        ExecStatus.OK, answer=value, wall_time_s=time.monotonic() - start
    )


def resolve_shim_command(shim_cmd: Sequence[str] | None = None) -> list[str]:
    """Locate the sandbox shim executable.

    Order: explicit argument, the ``GRRAF_SHIM_CMD`` environment variable
    (shell-split), then ``grraf-shim`` on PATH.
    """
    if shim_cmd:
        return list(shim_cmd)
    env_cmd = os.environ.get(ENV_SHIM_CMD)
    if env_cmd:
        return shlex.split(env_cmd)
    found = shutil.which(SHIM_EXECUTABLE)
    if found:
        return [found]
    raise BackendUnavailableError(
        f"no sandbox shim configured: pass a command, set {ENV_SHIM_CMD}, "
        f"or install {SHIM_EXECUTABLE!r} on PATH"
    )


def _kill_process_tree(proc: subprocess.Popen) -> None:
    try:
        if os.name == "posix":
            os.killpg(proc.pid, signal.SIGKILL)
        else:
            proc.kill()
    except (ProcessLookupError, PermissionError):
        pass
    # sweep any stragglers that escaped the process group
    try:
        import psutil

        parent = psutil.Process(proc.pid)
        for child in parent.children(recursive=True):
            try:
                child.kill()
            except psutil.NoSuchProcess:
                pass
        parent.kill()
    except Exception:
        pass
    try:
        proc.wait(timeout=2.0)
    except subprocess.TimeoutExpired:
        pass


def execute_external(
    source: str,
    graph_path: str | Path,
    time_limit_s: float,
    shim_cmd: Sequence[str] | None = None,
) -> ExecutionResult:
    """Run code in the sandbox shim subprocess, killing it at deadline."""
    command = resolve_shim_command(shim_cmd)
    request = json.dumps(
        {
            "code": source,
            "graph_path": str(graph_path),
            "time_limit_s": time_limit_s,
        }
    )
    start = time.monotonic()
    try:
        proc = subprocess.Popen(
            command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            start_new_session=(os.name == "posix"),
        )
    except OSError as exc:
        raise BackendUnavailableError(
            f"cannot start sandbox shim {command!r}: {exc}"
        ) from exc
    try:
        stdout, stderr = proc.communicate(request, timeout=time_limit_s)
    except subprocess.TimeoutExpired:
        _kill_process_tree(proc)
        return ExecutionResult(
            ExecStatus.TIMEOUT, wall_time_s=time.monotonic() - start
        )
    wall = time.monotonic() - start
    response_line = ""
    for line in reversed(stdout.splitlines()):
        if line.strip():
            response_line = line.strip()
            break
    try:
        doc = json.loads(response_line)
        status = doc["status"]
    except (json.JSONDecodeError, KeyError, TypeError):
        return ExecutionResult(
            ExecStatus.ERROR,
            error_message=(
                "malformed shim response; raw output: "
                f"stdout={stdout[-500:]!r} stderr={stderr[-200:]!r}"
            ),
            wall_time_s=wall,
        )
    if status == "ok":
        return ExecutionResult(
            ExecStatus.OK, answer=doc.get("answer"), wall_time_s=wall
        )
    return ExecutionResult(
        ExecStatus.ERROR,
        error_message=str(doc.get("error", "unknown shim error")),
        wall_time_s=wall,
    )


def execute(
    source: str,
    *,
    graph: PropertyGraph | None = None,
    graph_path: str | Path | None = None,
    time_limit_s: float = 300.0,
    backend: str = BACKEND_EMBEDDED,
    shim_cmd: Sequence[str] | None = None,
) -> ExecutionResult:
    """Run ``source`` on the chosen backend under ``time_limit_s``."""
    if backend == BACKEND_EMBEDDED:
        if graph is None:
            raise BackendUnavailableError("embedded backend needs a graph object")
        return execute_embedded(source, graph, time_limit_s)
    if backend == BACKEND_EXTERNAL:
        if graph_path is None:
            raise BackendUnavailableError("external backend needs a graph path")
        return execute_external(source, graph_path, time_limit_s, shim_cmd)
    raise BackendUnavailableError(f"unknown backend {backend!r}")
