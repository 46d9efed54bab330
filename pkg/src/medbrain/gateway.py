"""Uniform completion interface over interchangeable backends.

Two backends ship: RemoteBackend speaks the common chat-completion JSON
shape over HTTP, ScriptedBackend resolves prompts against an ordered
rule list and keeps the whole engine runnable offline and deterministic.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol, Sequence

import httpx

from .errors import NoScriptError, ProtocolError, TransportError

AUTH_TOKEN_ENV = "MEDBRAIN_LLM_TOKEN"


@dataclass(frozen=True)
class GenerationParams:
    temperature: float = 0.0
    max_new_tokens: int = 512
    timeout: float = 30.0
    retries: int = 2

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_new_tokens < 1:
            raise ValueError("max_new_tokens must be >= 1")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")


@dataclass(frozen=True)
class CompletionResult:
    text: str  # raw continuation, untrimmed
    backend_id: str
    latency: float


class LLMBackend(Protocol):
    backend_id: str

    def complete(self, prompt: str, params: GenerationParams = ...) -> CompletionResult:
        ...


def backoff_delay(attempt: int) -> float:
    """0.5 s doubling per attempt, capped at 4 s."""
    return min(0.5 * 2 ** attempt, 4.0)


@dataclass(frozen=True)
class ScriptRule:
    """One matcher/response pair; ``contains`` matches a substring of the
    prompt, ``equals`` the exact prompt. Exactly one must be set."""

    response: str
    contains: str | None = None
    equals: str | None = None

    def __post_init__(self):
        if (self.contains is None) == (self.equals is None):
            raise ValueError("rule needs exactly one of contains/equals")

    def matches(self, prompt: str) -> bool:
        if self.contains is not None:
            return self.contains in prompt
        return prompt == self.equals


class ScriptedBackend:
    """Deterministic backend: first matching rule wins, optional default.

    Immutable after construction; a pure function of (rules, prompt).
    """

    backend_id = "scripted"

    def __init__(self, rules: Sequence[ScriptRule], default_response: str | None = None):
        self.rules = tuple(rules)
        self.default_response = default_response

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        """Load rules from JSON: {"rules": [{"contains"|"equals", "response"}...],
        "default": optional text}."""
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        rules = [
            ScriptRule(
                response=entry["response"],
                contains=entry.get("contains"),
                equals=entry.get("equals"),
            )
            for entry in data.get("rules", [])
        ]
        return cls(rules, default_response=data.get("default"))

    def complete(
        self, prompt: str, params: GenerationParams = GenerationParams()
    ) -> CompletionResult:
        if not prompt:
            raise ValueError("prompt must be non-empty")
        start = time.monotonic()
        for rule in self.rules:
            if rule.matches(prompt):
                return CompletionResult(
                    text=rule.response,
                    backend_id=self.backend_id,
                    latency=time.monotonic() - start,
                )
        if self.default_response is not None:
            return CompletionResult(
                text=self.default_response,
                backend_id=self.backend_id,
                latency=time.monotonic() - start,
            )
        raise NoScriptError(f"no rule matches prompt: {prompt[:80]!r}")


class RemoteBackend:
    """Chat-completion client: POST {base}/v1/chat/completions with the full
    rendered prompt as a single user message.

    Performs at most 1 + retries attempts with exponential backoff; the
    auth token is read from the environment and never logged.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        *,
        client: httpx.Client | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.backend_id = f"remote:{model}"
        self._client = client
        self._sleep = sleep

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(AUTH_TOKEN_ENV)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def complete(
        self, prompt: str, params: GenerationParams = GenerationParams()
    ) -> CompletionResult:
        if not prompt:
            raise ValueError("prompt must be non-empty")
        payload = {
            "model": self.model,
            "temperature": params.temperature,
            "max_tokens": params.max_new_tokens,
            "messages": [{"role": "user", "content": prompt}],
        }
        url = f"{self.base_url}/v1/chat/completions"
        start = time.monotonic()
        last_error: Exception | None = None
        for attempt in range(1 + params.retries):
            if attempt:
                self._sleep(backoff_delay(attempt - 1))
            try:
                if self._client is not None:
                    resp = self._client.post(
                        url, json=payload, headers=self._headers(), timeout=params.timeout
                    )
                else:
                    resp = httpx.post(
                        url, json=payload, headers=self._headers(), timeout=params.timeout
                    )
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if resp.status_code >= 500:
                last_error = TransportError(f"server error {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise ProtocolError(f"unexpected status {resp.status_code}")
            return CompletionResult(
                text=_extract_content(resp),
                backend_id=self.backend_id,
                latency=time.monotonic() - start,
            )
        raise TransportError(
            f"completion failed after {1 + params.retries} attempts: {last_error}"
        )


def _extract_content(resp: httpx.Response) -> str:
    try:
        body = resp.json()
        content = body["choices"][0]["message"]["content"]
    except (ValueError, LookupError, TypeError) as exc:
        raise ProtocolError(f"malformed completion response: {exc}") from exc
    if not isinstance(content, str):
        raise ProtocolError("completion content is not text")
    return content
