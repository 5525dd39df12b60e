import json

import httpx
import pytest

from grraf.llm import (
    ChatMessage,
    LiveLLM,
    LLMError,
    ScriptedLLM,
    ScriptExhaustedError,
    TokenUsage,
    TransportError,
    default_token_counter,
    extract_code,
)


def user(text):
    return ChatMessage("user", text)


class TestScripted:
    def test_replays_in_order_with_usage(self):
        llm = ScriptedLLM(["ok"])
        text, usage = llm.complete([user("hi there")])
        assert text == "ok"
        assert usage.input_tokens == default_token_counter("hi there")
        assert usage.output_tokens == default_token_counter("ok")

    def test_empty_messages_rejected(self):
        with pytest.raises(ValueError):
            ScriptedLLM(["x"]).complete([])

    def test_exhaustion_is_loud(self):
        llm = ScriptedLLM(["only"])
        llm.complete([user("a")])
        with pytest.raises(ScriptExhaustedError):
            llm.complete([user("b")])

    def test_deterministic_transcript(self):
        def run():
            llm = ScriptedLLM(["one", "two"])
            llm.complete([user("q1")])
            llm.complete([ChatMessage("system", "s"), user("q2")])
            return [
                (e.messages, e.response, e.usage) for e in llm.transcript
            ]

        assert run() == run()

    def test_usage_additive(self):
        llm = ScriptedLLM(["a" * 8, "b" * 4])
        total = TokenUsage()
        _, u1 = llm.complete([user("x" * 40)])
        _, u2 = llm.complete([user("y" * 12)])
        total = total + u1 + u2
        assert total.input_tokens == 10 + 3
        assert total.output_tokens == 2 + 1

    def test_consecutive_assistant_rejected(self):
        llm = ScriptedLLM(["x"])
        msgs = [
            ChatMessage("assistant", "a"),
            ChatMessage("assistant", "b"),
        ]
        with pytest.raises(ValueError):
            llm.complete(msgs)

    def test_negative_usage_rejected(self):
        with pytest.raises(ValueError):
            TokenUsage(-1, 0)


def chat_response(content, prompt_tokens=11, completion_tokens=7):
    return {
        "choices": [{"message": {"role": "assistant", "content": content}}],
        "usage": {
            "prompt_tokens": prompt_tokens,
            "completion_tokens": completion_tokens,
        },
    }


class TestLive:
    def test_success_reports_endpoint_usage(self):
        def handler(request):
            body = json.loads(request.content)
            assert body["temperature"] == 0.0
            assert body["messages"][0]["content"] == "question"
            return httpx.Response(200, json=chat_response("answer", 42, 9))

        llm = LiveLLM(
            "https://example.test/v1/chat",
            api_key="k",
            transport=httpx.MockTransport(handler),
        )
        text, usage = llm.complete([user("question")])
        assert text == "answer"
        assert usage == TokenUsage(42, 9)

    def test_retries_then_succeeds(self):
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            if calls["n"] < 3:
                raise httpx.ConnectError("boom", request=request)
            return httpx.Response(200, json=chat_response("late"))

        sleeps = []
        llm = LiveLLM(
            "https://example.test/v1/chat",
            transport=httpx.MockTransport(handler),
            sleeper=sleeps.append,
        )
        text, _ = llm.complete([user("q")])
        assert text == "late"
        assert calls["n"] == 3
        assert sleeps == [0.5, 1.0]

    def test_hard_failure_after_retries(self):
        def handler(request):
            raise httpx.ConnectError("down", request=request)

        llm = LiveLLM(
            "https://example.test/v1/chat",
            transport=httpx.MockTransport(handler),
            max_retries=2,
            sleeper=lambda _x: None,
        )
        with pytest.raises(TransportError):
            llm.complete([user("q")])

    def test_4xx_is_not_retried(self):
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            return httpx.Response(401, text="nope")

        llm = LiveLLM(
            "https://example.test/v1/chat",
            transport=httpx.MockTransport(handler),
            sleeper=lambda _x: None,
        )
        with pytest.raises(LLMError):
            llm.complete([user("q")])
        assert calls["n"] == 1

    def test_5xx_retried(self):
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            if calls["n"] == 1:
                return httpx.Response(503, text="busy")
            return httpx.Response(200, json=chat_response("ok"))

        llm = LiveLLM(
            "https://example.test/v1/chat",
            transport=httpx.MockTransport(handler),
            sleeper=lambda _x: None,
        )
        assert llm.complete([user("q")])[0] == "ok"

    def test_from_env_requires_endpoint(self, monkeypatch):
        monkeypatch.delenv("GRRAF_LLM_ENDPOINT", raising=False)
        with pytest.raises(LLMError):
            LiveLLM.from_env()


class TestExtractCode:
    def test_first_fenced_block(self):
        assert extract_code("here:\n```\nreturn 1\n```") == "return 1"

    def test_language_tag_ignored(self):
        assert extract_code("```python\nx = 2\n```") == "x = 2"

    def test_bare_code_identity(self):
        assert extract_code("  return 42  ") == "return 42"

    def test_two_blocks_first_wins(self):
        text = "```\nfirst\n```\nand\n```\nsecond\n```"
        assert extract_code(text) == "first"

    def test_multiline_block(self):
        text = "```\na = 1\nb = 2\n```"
        assert extract_code(text) == "a = 1\nb = 2"
