"""Chat-completion backends with token accounting.

Two interchangeable backends: :class:`LiveLLM` talks to an external
chat-completions HTTP endpoint; :class:`ScriptedLLM` replays a fixed
response script deterministically for tests and benchmarks.  Every
``complete`` call returns the response text plus a :class:`TokenUsage`,
and both backends record a transcript of exchanges.
"""

from __future__ import annotations

import os
import re
import threading
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import httpx

ROLES = ("system", "user", "assistant")

ENV_ENDPOINT = "GRRAF_LLM_ENDPOINT"
ENV_API_KEY = "GRRAF_LLM_API_KEY"
ENV_MODEL = "GRRAF_LLM_MODEL"


class LLMError(Exception):
    """Base class for completion backend failures."""


class TransportError(LLMError):
    """Network/endpoint failure after exhausting retries."""


class ScriptExhaustedError(LLMError):
    """A scripted backend ran out of queued responses."""


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str


@dataclass(frozen=True)
class TokenUsage:
    input_tokens: int = 0
    output_tokens: int = 0

    def __post_init__(self) -> None:
        if self.input_tokens < 0 or self.output_tokens < 0:
            raise ValueError("token counts must be non-negative")

    def __add__(self, other: "TokenUsage") -> "TokenUsage":
        return TokenUsage(
            self.input_tokens + other.input_tokens,
            self.output_tokens + other.output_tokens,
        )


@dataclass(frozen=True)
class ChatExchange:
    messages: tuple[ChatMessage, ...]
    response: str
    usage: TokenUsage


def _validate_messages(messages: Sequence[ChatMessage]) -> tuple[ChatMessage, ...]:
    if not messages:
        raise ValueError("messages must be non-empty")
    previous = None
    for m in messages:
        if m.role not in ROLES:
            raise ValueError(f"unknown role {m.role!r}")
        if m.role == "assistant" and previous == "assistant":
            raise ValueError("two consecutive assistant messages")
        previous = m.role
    return tuple(messages)


def default_token_counter(text: str) -> int:
    """Deterministic approximation: one token per four characters."""
    return (len(text) + 3) // 4


class LLMClient:
    """Interface shared by all completion backends."""

    def complete(self, messages: Sequence[ChatMessage]) -> tuple[str, TokenUsage]:
        raise NotImplementedError


class ScriptedLLM(LLMClient):
    """Replays a fixed queue of responses; fully deterministic.

    Token usage comes from a pluggable counter applied to the prompt and
    the response.  An exhausted script raises
    :class:`ScriptExhaustedError` rather than silently reusing entries.
    Each pipeline/question should get its own instance so parallel runs
    cannot interleave scripts.
    """

    def __init__(
        self,
        script: Sequence[str],
        token_counter: Callable[[str], int] = default_token_counter,
    ):
        self._script = list(script)
        self._next = 0
        self._counter = token_counter
        self._lock = threading.Lock()
        self.transcript: list[ChatExchange] = []

    def complete(self, messages: Sequence[ChatMessage]) -> tuple[str, TokenUsage]:
        msgs = _validate_messages(messages)
        with self._lock:
            if self._next >= len(self._script):
                raise ScriptExhaustedError(
                    f"script exhausted after {len(self._script)} responses"
                )
            response = self._script[self._next]
            self._next += 1
            usage = TokenUsage(
                input_tokens=sum(self._counter(m.content) for m in msgs),
                output_tokens=self._counter(response),
            )
            self.transcript.append(ChatExchange(msgs, response, usage))
        return response, usage

    @property
    def remaining(self) -> int:
        return len(self._script) - self._next


class LiveLLM(LLMClient):
    """Chat-completions JSON client over HTTPS.

    Request: ``{"model": ..., "messages": [{"role", "content"}...],
    "temperature": ...}`` with a bearer-token header; response:
    ``choices[0].message.content`` plus ``usage.prompt_tokens`` /
    ``usage.completion_tokens``.  Transport failures and 5xx responses
    are retried with exponential backoff; other HTTP errors are hard
    failures.
    """

    def __init__(
        self,
        endpoint: str,
        api_key: str = "",
        model: str = "default",
        temperature: float = 0.0,
        max_retries: int = 3,
        timeout_s: float = 120.0,
        transport: httpx.BaseTransport | None = None,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        self.endpoint = endpoint
        self.model = model
        self.temperature = temperature
        self.max_retries = max_retries
        self._sleeper = sleeper
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._client = httpx.Client(
            headers=headers, timeout=timeout_s, transport=transport
        )
        self.transcript: list[ChatExchange] = []
        self._lock = threading.Lock()

    @classmethod
    def from_env(cls, **kwargs) -> "LiveLLM":
        endpoint = os.environ.get(ENV_ENDPOINT)
        if not endpoint:
            raise LLMError(f"{ENV_ENDPOINT} is not set")
        return cls(
            endpoint,
            api_key=os.environ.get(ENV_API_KEY, ""),
            model=os.environ.get(ENV_MODEL, "default"),
            **kwargs,
        )

    def complete(self, messages: Sequence[ChatMessage]) -> tuple[str, TokenUsage]:
        msgs = _validate_messages(messages)
        payload = {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.content} for m in msgs],
            "temperature": self.temperature,
        }
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                self._sleeper(0.5 * 2 ** (attempt - 1))
            try:
                http_response = self._client.post(self.endpoint, json=payload)
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if http_response.status_code >= 500:
                last_error = TransportError(
                    f"server error {http_response.status_code}"
                )
                continue
            if http_response.status_code != 200:
                raise LLMError(
                    f"endpoint returned {http_response.status_code}: "
                    f"{http_response.text[:200]}"
                )
            doc = http_response.json()
            try:
                text = doc["choices"][0]["message"]["content"]
                usage_doc = doc.get("usage", {})
            except (KeyError, IndexError, TypeError) as exc:
                raise LLMError(f"malformed endpoint response: {exc}") from exc
            usage = TokenUsage(
                input_tokens=int(usage_doc.get("prompt_tokens", 0)),
                output_tokens=int(usage_doc.get("completion_tokens", 0)),
            )
            with self._lock:
                self.transcript.append(ChatExchange(msgs, text, usage))
            return text, usage
        raise TransportError(f"transport failed after retries: {last_error}")


_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)


def extract_code(response: str) -> str:
    """First fenced code block, or the whole response trimmed."""
    m = _FENCE_RE.search(response)
    if m:
        return m.group(1).strip("\n")
    return response.strip()
