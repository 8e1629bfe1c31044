"""Generation-model access: one completion operation, plus call accounting.

Every pipeline stage reaches the model through ``LLMClient.complete``, which
records the call in a per-run ledger. That ledger is the single source of
truth for how many generations and retrieval searches a run performed.

Providers:
  * ``HttpChatProvider`` speaks an OpenAI-compatible chat-completions
    endpoint, with retries on transient failures.
  * ``ScriptedProvider`` replays canned responses keyed by stage label, so
    whole pipeline runs are reproducible offline.
"""

from __future__ import annotations

import json
import os
import threading
import time
from collections import deque
from dataclasses import dataclass
from pathlib import Path

DEFAULT_TEMPERATURE = 0.7
DEFAULT_TIMEOUT = 60.0
RETRY_BACKOFF_S = (1.0, 2.0, 4.0)


class LLMError(RuntimeError):
    pass


class TransportError(LLMError):
    """The endpoint stayed unreachable after all retries."""


class NonRetryableError(LLMError):
    """The endpoint rejected the request (4xx other than 429)."""


class ScriptExhaustedError(LLMError):
    """The scripted provider has no response left for the requested stage."""


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    temperature: float = DEFAULT_TEMPERATURE
    seed: int | None = None
    max_tokens: int | None = None

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens is not None and self.max_tokens <= 0:
            raise ValueError("max output length must be positive")


class CallLedger:
    """Monotone per-run counters, broken down by stage label.

    Updates are atomic so concurrent judge calls within one sample can share
    a ledger; separate runs get separate ledgers.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self.generations_by_stage: dict[str, int] = {}
        self.retrievals_by_stage: dict[str, int] = {}
        self.seeds: list[int | None] = []

    @property
    def generation_calls(self) -> int:
        return sum(self.generations_by_stage.values())

    @property
    def retrieval_searches(self) -> int:
        return sum(self.retrievals_by_stage.values())

    def record_generation(self, stage: str, seed: int | None = None) -> None:
        with self._lock:
            self.generations_by_stage[stage] = self.generations_by_stage.get(stage, 0) + 1
            self.seeds.append(seed)

    def record_retrieval(self, stage: str) -> None:
        with self._lock:
            self.retrievals_by_stage[stage] = self.retrievals_by_stage.get(stage, 0) + 1

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "generation_calls": self.generation_calls,
                "retrieval_searches": self.retrieval_searches,
                "generations_by_stage": dict(self.generations_by_stage),
                "retrievals_by_stage": dict(self.retrievals_by_stage),
            }


def _default_transport(url: str, headers: dict, payload: dict, timeout: float):
    """POST json, return (status_code, parsed body). Raises TransportError
    on connection-level failures so the retry loop can treat them alike."""
    import requests

    try:
        resp = requests.post(url, headers=headers, json=payload, timeout=timeout)
    except requests.RequestException as exc:
        raise TransportError(f"request failed: {exc}") from exc
    try:
        body = resp.json()
    except ValueError:
        body = {"raw": resp.text}
    return resp.status_code, body


class HttpChatProvider:
    """OpenAI-compatible chat-completions client.

    Single-turn only: each prompt is self-contained, so no conversation
    state is kept. Retries up to three times on timeouts, 429 and 5xx with
    1s/2s/4s backoff; other 4xx fail immediately.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str = "",
        timeout: float = DEFAULT_TIMEOUT,
        transport=None,
        sleeper=time.sleep,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.timeout = timeout
        self._transport = transport or _default_transport
        self._sleep = sleeper

    @classmethod
    def from_env(cls, env=os.environ) -> "HttpChatProvider":
        url = env.get("ANALOGYGEN_BASE_URL", "")
        if not url:
            raise NonRetryableError("ANALOGYGEN_BASE_URL is not set")
        return cls(
            base_url=url,
            model=env.get("ANALOGYGEN_MODEL", "gpt-3.5-turbo"),
            api_key=env.get("ANALOGYGEN_API_KEY", ""),
            timeout=float(env.get("ANALOGYGEN_TIMEOUT", DEFAULT_TIMEOUT)),
        )

    def describe(self) -> str:
        return f"http:{self.base_url}:{self.model}"

    def complete(self, request: GenerationRequest, stage: str) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
        }
        if request.seed is not None:
            payload["seed"] = request.seed
        if request.max_tokens is not None:
            payload["max_tokens"] = request.max_tokens

        url = f"{self.base_url}/chat/completions"
        last_error: Exception | None = None
        for attempt in range(1 + len(RETRY_BACKOFF_S)):
            if attempt:
                self._sleep(RETRY_BACKOFF_S[attempt - 1])
            try:
                status, body = self._transport(url, headers, payload, self.timeout)
            except TransportError as exc:
                last_error = exc
                continue
            if status == 200:
                try:
                    return body["choices"][0]["message"]["content"]
                except (KeyError, IndexError, TypeError) as exc:
                    raise NonRetryableError(f"malformed completion response: {exc}") from exc
            if status == 429 or status >= 500:
                last_error = TransportError(f"endpoint returned {status}")
                continue
            raise NonRetryableError(f"endpoint returned {status}: {body}")
        raise TransportError(f"gave up after retries: {last_error}")


class ScriptedProvider:
    """Offline double replaying responses by stage label.

    Matching by stage (not by prompt text) keeps scripts stable when prompt
    wording or retrieved content changes.
    """

    def __init__(self, script: dict[str, list[str]]):
        self._queues = {stage: deque(responses) for stage, responses in script.items()}
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path) -> "ScriptedProvider":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(data)

    def describe(self) -> str:
        return "scripted"

    def complete(self, request: GenerationRequest, stage: str) -> str:
        with self._lock:
            queue = self._queues.get(stage)
            if not queue:
                raise ScriptExhaustedError(f"no scripted response left for stage {stage!r}")
            return queue.popleft()


class LLMClient:
    """Binds a provider to a per-run ledger."""

    def __init__(self, provider, ledger: CallLedger | None = None):
        self.provider = provider
        self.ledger = ledger or CallLedger()

    def complete(self, request: GenerationRequest, stage: str) -> str:
        text = self.provider.complete(request, stage)
        self.ledger.record_generation(stage, request.seed)
        return text
