"""Provider-agnostic completion gateway.

Two providers: a deterministic mock driven by a scripted response list, and
a generic HTTP chat-completion endpoint (bearer credential read from an
environment variable, never from config files).
"""
from __future__ import annotations

import json
import math
import os
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional


class GatewayError(Exception):
    pass


class ProviderFailure(GatewayError):
    pass


class AuthFailure(GatewayError):
    pass


class TransportError(GatewayError):
    """Retryable failure (network, 5xx, scripted mock failure)."""


class NoCodeBlock(GatewayError):
    pass


class SignatureAbsent(GatewayError):
    pass


@dataclass
class LlmRequest:
    model: str
    system_text: str
    user_text: str
    temperature: float = 1.0
    top_p: float = 0.9
    max_tokens: int = 2000
    request_id: str = ""

    def __post_init__(self):
        if not (0.0 <= self.temperature <= 2.0):
            raise ValueError("temperature must be in [0, 2]")
        if not (0.0 < self.top_p <= 1.0):
            raise ValueError("top_p must be in (0, 1]")


@dataclass
class LlmResponse:
    text: str
    prompt_tokens: int
    completion_tokens: int
    provider_latency: float = 0.0
    attempt: int = 1


def surrogate_tokens(text: str) -> int:
    """Offline token surrogate: whitespace word count x 1.3, rounded up."""
    words = len(text.split())
    return math.ceil(words * 1.3)


# ---------------------------------------------------------------------------
# Providers
# ---------------------------------------------------------------------------

class MockProvider:
    """Scripted provider: entries are {match?: substring, response: text,
    fail_times?: int}.

    On each call, the first entry whose ``match`` substring occurs in the
    user text wins; otherwise the next match-less entry in cyclic order is
    consumed.  An entry's first ``fail_times`` uses raise a transport error
    (consumed per entry), which exercises the retry path deterministically.
    """

    name = "mock"

    def __init__(self, entries: list[dict[str, Any]]):
        self.entries = entries
        self._fails_left = [int(e.get("fail_times", 0)) for e in entries]
        self._plain_order = [i for i, e in enumerate(entries) if not e.get("match")]
        self._plain_cursor = 0

    @classmethod
    def from_file(cls, path: str) -> "MockProvider":
        entries = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(entries, list):
            raise ValueError("mock script must be a JSON array")
        return cls(entries)

    def _pick(self, request: LlmRequest) -> int:
        for i, entry in enumerate(self.entries):
            m = entry.get("match")
            if m and m in request.user_text:
                return i
        if not self._plain_order:
            raise ProviderFailure("mock script has no applicable entry")
        i = self._plain_order[self._plain_cursor % len(self._plain_order)]
        self._plain_cursor += 1
        return i

    def send(self, request: LlmRequest) -> str:
        i = self._pick(request)
        if self._fails_left[i] > 0:
            self._fails_left[i] -= 1
            raise TransportError(f"mock entry {i} scripted failure")
        return str(self.entries[i]["response"])


class HttpProvider:
    """Generic chat-completion endpoint (OpenAI/Anthropic-style JSON body)."""

    name = "http_generic"

    def __init__(self, endpoint: str, credentials_env: str, timeout: float = 60.0):
        if not endpoint:
            raise ValueError("http provider requires an endpoint")
        self.endpoint = endpoint
        self.credentials_env = credentials_env
        self.timeout = timeout

    def send(self, request: LlmRequest) -> str:
        import requests

        token = os.environ.get(self.credentials_env, "")
        if not token:
            raise AuthFailure(f"credential env var {self.credentials_env} is empty")
        body = {
            "model": request.model,
            "messages": [
                {"role": "system", "content": request.system_text},
                {"role": "user", "content": request.user_text},
            ],
            "temperature": request.temperature,
            "top_p": request.top_p,
            "max_tokens": request.max_tokens,
        }
        try:
            resp = requests.post(self.endpoint, json=body, timeout=self.timeout,
                                 headers={"Authorization": f"Bearer {token}"})
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        if resp.status_code in (401, 403):
            raise AuthFailure(f"HTTP {resp.status_code} from provider")
        if resp.status_code >= 500:
            raise TransportError(f"HTTP {resp.status_code} from provider")
        if resp.status_code != 200:
            raise ProviderFailure(f"HTTP {resp.status_code}: {resp.text[:500]}")
        data = resp.json()
        try:
            if "choices" in data:  # OpenAI shape
                return data["choices"][0]["message"]["content"]
            return data["content"][0]["text"]  # Anthropic shape
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderFailure(f"unexpected response shape: {exc}") from exc


@dataclass
class ProviderConfig:
    provider: Any                      # object with .send(request) and .name
    max_retries: int = 3
    backoff_base: float = 0.0          # seconds; mock runs keep this at 0
    attempts_log: list[dict] = field(default_factory=list)


def complete(request: LlmRequest, provider_config: ProviderConfig) -> LlmResponse:
    """Blocking completion with exponential backoff on transport failures."""
    provider = provider_config.provider
    last_error: Optional[Exception] = None
    attempts = provider_config.max_retries + 1
    for attempt in range(1, attempts + 1):
        start = time.monotonic()
        try:
            text = provider.send(request)
        except AuthFailure:
            raise
        except (TransportError, ProviderFailure) as exc:
            last_error = exc
            provider_config.attempts_log.append(
                {"request_id": request.request_id, "attempt": attempt, "error": str(exc)})
            if attempt < attempts and provider_config.backoff_base > 0:
                time.sleep(provider_config.backoff_base * (2 ** (attempt - 1)))
            continue
        latency = time.monotonic() - start
        provider_config.attempts_log.append(
            {"request_id": request.request_id, "attempt": attempt, "error": None})
        return LlmResponse(
            text=text,
            prompt_tokens=surrogate_tokens(request.system_text + " " + request.user_text),
            completion_tokens=surrogate_tokens(text),
            provider_latency=latency,
            attempt=attempt,
        )
    raise ProviderFailure(f"all {attempts} attempts failed: {last_error}")


# ---------------------------------------------------------------------------
# Response post-processing
# ---------------------------------------------------------------------------

_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)


def function_name_of(signature: str) -> str:
    m = re.search(r"([A-Za-z_]\w*)\s*\(", signature)
    if not m:
        raise ValueError(f"cannot find a function name in {signature!r}")
    return m.group(1)


def extract_code_block(response_text: str, expected_signature: str) -> str:
    """First fenced code block mentioning the expected function name."""
    blocks = _FENCE_RE.findall(response_text)
    if not blocks:
        raise NoCodeBlock("response contains no fenced code block")
    name = function_name_of(expected_signature)
    for block in blocks:
        if re.search(r"\b%s\b" % re.escape(name), block):
            return block.strip("\n")
    raise SignatureAbsent(f"no fenced block contains {name!r}")
