"""Backend contract: scripted replay, HTTP retry behavior, code-block
extraction."""
import json

import pytest
import requests

from shapecraft.backend import (BackendConfig, ChatMessage, HttpBackend,
                                ScriptMismatch, ScriptExhausted,
                                ScriptedBackend, ScriptedExchange,
                                extract_code_block, messages_digest)
from shapecraft.errors import AuthError, MalformedResponse, TransportError

MSG = [ChatMessage("user", "hello")]
CFG = BackendConfig(retries=3)


class _FakeResponse:
    def __init__(self, status_code, body=None):
        self.status_code = status_code
        self._body = body
        self.text = json.dumps(body) if body is not None else ""

    def json(self):
        if self._body is None:
            raise ValueError("no body")
        return self._body


def _ok_body(text):
    return {"choices": [{"message": {"content": text}}]}


def test_chat_message_validation():
    with pytest.raises(ValueError):
        ChatMessage("oracle", "hi")
    with pytest.raises(ValueError):
        ChatMessage("user", "")


def test_backend_config_validation():
    with pytest.raises(ValueError):
        BackendConfig(temperature=3.0)
    with pytest.raises(ValueError):
        BackendConfig(retries=-1)


def test_scripted_replay_in_order():
    sb = ScriptedBackend.from_responses(["a", "b"])
    assert sb.complete(MSG, CFG) == "a"
    assert sb.complete(MSG, CFG) == "b"
    with pytest.raises(ScriptExhausted):
        sb.complete(MSG, CFG)
    assert sb.call_count == 3


def test_scripted_digest_check():
    good = ScriptedBackend([ScriptedExchange("ok", digest=messages_digest(MSG))])
    assert good.complete(MSG, CFG) == "ok"
    bad = ScriptedBackend([ScriptedExchange("ok", digest="deadbeef")])
    with pytest.raises(ScriptMismatch):
        bad.complete(MSG, CFG)


def test_scripted_from_jsonl(tmp_path):
    path = tmp_path / "t.jsonl"
    path.write_text(json.dumps({"response": "ok"}) + "\n"
                    + json.dumps({"response": "two", "digest": None}) + "\n")
    sb = ScriptedBackend.from_jsonl(path)
    assert sb.complete(MSG, CFG) == "ok"
    assert sb.complete(MSG, CFG) == "two"


def test_http_retries_then_succeeds(monkeypatch):
    calls = []

    def fake_post(url, json=None, headers=None, timeout=None):
        calls.append(url)
        if len(calls) < 3:
            raise requests.ConnectionError("down")
        return _FakeResponse(200, _ok_body("hello"))

    monkeypatch.setattr(requests, "post", fake_post)
    hb = HttpBackend(api_key="k", sleep=lambda s: None)
    assert hb.complete(MSG, BackendConfig(retries=3)) == "hello"
    assert len(calls) == 3


def test_http_transport_error_after_retries(monkeypatch):
    def fake_post(url, **kw):
        raise requests.ConnectionError("down")

    monkeypatch.setattr(requests, "post", fake_post)
    hb = HttpBackend(api_key="k", sleep=lambda s: None)
    with pytest.raises(TransportError):
        hb.complete(MSG, BackendConfig(retries=2))


def test_http_auth_error(monkeypatch):
    monkeypatch.setattr(requests, "post", lambda url, **kw: _FakeResponse(401))
    hb = HttpBackend(api_key="k")
    with pytest.raises(AuthError):
        hb.complete(MSG, CFG)


def test_http_missing_key(monkeypatch):
    monkeypatch.delenv("SHAPECRAFT_API_KEY", raising=False)
    hb = HttpBackend()
    with pytest.raises(AuthError):
        hb.complete(MSG, CFG)


def test_http_env_key_used(monkeypatch):
    seen = {}

    def fake_post(url, json=None, headers=None, timeout=None):
        seen["auth"] = headers["Authorization"]
        return _FakeResponse(200, _ok_body("ok"))

    monkeypatch.setenv("SHAPECRAFT_API_KEY", "secret-key")
    monkeypatch.setattr(requests, "post", fake_post)
    assert HttpBackend().complete(MSG, CFG) == "ok"
    assert seen["auth"] == "Bearer secret-key"


def test_http_malformed_response(monkeypatch):
    monkeypatch.setattr(requests, "post",
                        lambda url, **kw: _FakeResponse(200, {"nope": 1}))
    hb = HttpBackend(api_key="k")
    with pytest.raises(MalformedResponse):
        hb.complete(MSG, CFG)


def test_http_images_encoded_as_data_urls(monkeypatch):
    captured = {}

    def fake_post(url, json=None, headers=None, timeout=None):
        captured["payload"] = json
        return _FakeResponse(200, _ok_body("ok"))

    monkeypatch.setattr(requests, "post", fake_post)
    hb = HttpBackend(api_key="k")
    hb.complete([ChatMessage("user", "look", (b"\x89PNGfake",))], CFG)
    content = captured["payload"]["messages"][0]["content"]
    assert content[0] == {"type": "text", "text": "look"}
    assert content[1]["image_url"]["url"].startswith("data:image/png;base64,")


def test_extract_code_block_variants():
    body, diags = extract_code_block("x\n```jsonl\n{\"a\": 1}\n```\ny", "jsonl")
    assert body == '{"a": 1}' and diags == []
    first, _ = extract_code_block("```dsl\none\n```\n```dsl\ntwo\n```", "dsl")
    assert first == "one"
    whole, diags = extract_code_block("no fences")
    assert whole == "no fences"
    assert diags[0].severity == "warning"
    fallback, diags = extract_code_block("```python\ncode\n```", "dsl")
    assert fallback == "code"
    assert diags[0].severity == "warning"
