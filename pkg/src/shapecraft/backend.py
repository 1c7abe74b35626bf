"""Chat-completion backends.

Two implementations of one contract: an HTTP client for OpenAI-compatible
chat endpoints (text plus base64 PNG image input) and a scripted replay
backend that serves canned responses for deterministic tests. Scripted
transcripts are JSONL lines of {"digest": sha256-of-prompt-or-null,
"response": text}; a non-null digest must match the actual prompt, which
catches prompt drift loudly.
"""
from __future__ import annotations

import base64
import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from .errors import AuthError, BackendError, MalformedResponse, TransportError
from .program.diagnostics import Diagnostic

logger = logging.getLogger("shapecraft.backend")

API_KEY_ENV = "SHAPECRAFT_API_KEY"


@dataclass(frozen=True)
class ChatMessage:
    role: str  # "system" | "user" | "assistant"
    text: str = ""
    images: Tuple[bytes, ...] = ()

    def __post_init__(self):
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"bad role {self.role!r}")
        if not self.text and not self.images:
            raise ValueError("message needs text or images")
        object.__setattr__(self, "images", tuple(self.images))


@dataclass(frozen=True)
class BackendConfig:
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-4o"
    temperature: float = 0.5
    retries: int = 3
    timeout: float = 120.0

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be in [0, 2]")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")


def messages_digest(messages: Sequence[ChatMessage]) -> str:
    """Stable digest over roles, text, and image payloads."""
    h = hashlib.sha256()
    for m in messages:
        h.update(m.role.encode())
        h.update(b"\0")
        h.update(m.text.encode())
        h.update(b"\0")
        for img in m.images:
            h.update(hashlib.sha256(img).digest())
        h.update(b"\1")
    return h.hexdigest()


class Backend:
    """Contract: complete(messages, cfg) -> assistant text."""

    def complete(self, messages: Sequence[ChatMessage],
                 cfg: BackendConfig) -> str:
        raise NotImplementedError


class HttpBackend(Backend):
    """OpenAI-compatible chat completions over HTTP with retry/backoff."""

    def __init__(self, api_key: Optional[str] = None, trace: bool = False,
                 backoff_base: float = 1.0, sleep=time.sleep):
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.trace = trace
        self.backoff_base = backoff_base
        self._sleep = sleep

    def complete(self, messages: Sequence[ChatMessage],
                 cfg: BackendConfig) -> str:
        import requests

        if not messages:
            raise BackendError("no messages")
        if not self.api_key:
            raise AuthError(f"no API key: set {API_KEY_ENV}")
        payload = {
            "model": cfg.model,
            "temperature": cfg.temperature,
            "messages": [self._encode(m) for m in messages],
        }
        headers = {
            "Authorization": f"Bearer {self.api_key}",
            "Content-Type": "application/json",
        }
        if self.trace:
            logger.info("request %s model=%s messages=%s", cfg.endpoint,
                        cfg.model, json.dumps(self._redact(payload))[:4000])
        last_exc: Optional[Exception] = None
        for attempt in range(cfg.retries + 1):
            try:
                resp = requests.post(cfg.endpoint, json=payload,
                                     headers=headers, timeout=cfg.timeout)
            except requests.RequestException as exc:
                last_exc = exc
                if attempt < cfg.retries:
                    self._sleep(self.backoff_base * (2 ** attempt))
                continue
            if resp.status_code in (401, 403):
                raise AuthError(f"authentication failed (HTTP {resp.status_code})")
            if resp.status_code >= 500 or resp.status_code == 429:
                last_exc = TransportError(f"HTTP {resp.status_code}")
                if attempt < cfg.retries:
                    self._sleep(self.backoff_base * (2 ** attempt))
                continue
            if resp.status_code != 200:
                raise TransportError(f"HTTP {resp.status_code}: {resp.text[:500]}")
            return self._extract(resp)
        raise TransportError(f"request failed after {cfg.retries + 1} attempts: "
                             f"{last_exc}")

    def _extract(self, resp) -> str:
        try:
            body = resp.json()
            text = body["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise MalformedResponse(f"unexpected response shape: {exc}")
        if not isinstance(text, str):
            raise MalformedResponse("assistant content is not text")
        if self.trace:
            logger.info("response %s", text[:4000])
        return text

    @staticmethod
    def _encode(m: ChatMessage) -> dict:
        if not m.images:
            return {"role": m.role, "content": m.text}
        content = []
        if m.text:
            content.append({"type": "text", "text": m.text})
        for img in m.images:
            b64 = base64.b64encode(img).decode("ascii")
            content.append({"type": "image_url",
                            "image_url": {"url": f"data:image/png;base64,{b64}"}})
        return {"role": m.role, "content": content}

    @staticmethod
    def _redact(payload: dict) -> dict:
        # keys never live in the payload, but keep image payloads short
        def shrink(obj):
            if isinstance(obj, dict):
                return {k: ("<image>" if k == "url" else shrink(v))
                        for k, v in obj.items()}
            if isinstance(obj, list):
                return [shrink(v) for v in obj]
            return obj
        return shrink(payload)


@dataclass
class ScriptedExchange:
    response: str
    digest: Optional[str] = None  # None skips the prompt check


class ScriptMismatch(BackendError):
    pass


class ScriptExhausted(BackendError):
    pass


class ScriptedBackend(Backend):
    """Replays canned responses in order; thread-safe single queue."""

    def __init__(self, exchanges: Sequence[ScriptedExchange] = ()):
        self._queue: List[ScriptedExchange] = list(exchanges)
        self._lock = threading.Lock()
        self.calls: List[List[ChatMessage]] = []

    @classmethod
    def from_responses(cls, responses: Sequence[str]) -> "ScriptedBackend":
        return cls([ScriptedExchange(response=r) for r in responses])

    @classmethod
    def from_jsonl(cls, path) -> "ScriptedBackend":
        exchanges = []
        for lineno, line in enumerate(
                Path(path).read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            exchanges.append(ScriptedExchange(response=obj["response"],
                                              digest=obj.get("digest")))
        return cls(exchanges)

    @property
    def remaining(self) -> int:
        with self._lock:
            return len(self._queue)

    @property
    def call_count(self) -> int:
        with self._lock:
            return len(self.calls)

    def complete(self, messages: Sequence[ChatMessage],
                 cfg: BackendConfig) -> str:
        with self._lock:
            self.calls.append(list(messages))
            if not self._queue:
                raise ScriptExhausted(
                    f"scripted backend exhausted after {len(self.calls) - 1} calls")
            exchange = self._queue.pop(0)
        if exchange.digest is not None:
            actual = messages_digest(messages)
            if actual != exchange.digest:
                raise ScriptMismatch(
                    f"prompt drift: expected digest {exchange.digest}, "
                    f"got {actual}; last user text begins: "
                    f"{messages[-1].text[:200]!r}")
        return exchange.response


def extract_code_block(reply: str, language_tag: Optional[str] = None
                       ) -> Tuple[str, List[Diagnostic]]:
    """First fenced code block matching the tag (any fence if tag is None).

    Returns (text, diagnostics); a fence-free reply comes back whole with a
    warning diagnostic.
    """
    import re
    pattern = re.compile(r"```([A-Za-z0-9_+-]*)[ \t]*\n(.*?)```", re.DOTALL)
    fallback = None
    for m in pattern.finditer(reply):
        tag, body = m.group(1), m.group(2)
        if language_tag is None or tag == language_tag:
            return body.rstrip("\n"), []
        if fallback is None:
            fallback = body.rstrip("\n")
    if fallback is not None:
        return fallback, [Diagnostic(
            1, "warning",
            f"no fenced block tagged '{language_tag}'; using the first block")]
    return reply.strip(), [Diagnostic(
        1, "warning", "reply contains no fenced code block; using full text")]
