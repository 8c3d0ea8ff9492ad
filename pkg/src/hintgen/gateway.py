"""Uniform port to text-generation backends: sampling, telemetry, cost.

Two backends ship here: an OpenAI-compatible chat-completions HTTP client
and a deterministic scripted mock for offline tests and benchmarks. All
sampling goes through :func:`generate`, which fans out n independent
single-sample requests with bounded concurrency and retries transient
transport failures with exponential backoff.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Protocol, Sequence

import httpx

DEFAULT_CONCURRENCY = 4
DEFAULT_MAX_RETRIES = 3
BACKOFF_BASE_S = 0.25

Message = dict  # {"role": ..., "content": ...}


class GatewayError(Exception):
    pass


class NonRetryableBackendError(GatewayError):
    """Authentication/4xx class failures: retrying cannot help."""


class TransientBackendError(GatewayError):
    """Transport failures and 5xx/429: worth retrying with backoff."""


@dataclass(frozen=True)
class SamplingParams:
    temperature: float = 0.7
    n: int = 1
    max_tokens: int = 1024
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.temperature <= 2.0):
            raise ValueError("temperature must be in [0, 2]")
        if not (1 <= self.n <= 64):
            raise ValueError("n must be in [1, 64]")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")


@dataclass(frozen=True)
class Completion:
    text: str
    prompt_tokens: int
    completion_tokens: int
    latency_ms: int
    backend_id: str

    def __post_init__(self) -> None:
        if min(self.prompt_tokens, self.completion_tokens, self.latency_ms) < 0:
            raise ValueError("telemetry fields must be non-negative")


@dataclass(frozen=True)
class GenerationError:
    sample_index: int
    message: str


@dataclass
class GenerationBatch:
    completions: list[Completion]
    errors: list[GenerationError] = field(default_factory=list)

    @property
    def degraded(self) -> bool:
        return bool(self.errors)


class TelemetrySink:
    """Append-only, thread-safe record of completions for reporting."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._events: list[dict] = []

    def record(self, completion: Completion) -> None:
        with self._lock:
            self._events.append(
                {
                    "backend_id": completion.backend_id,
                    "prompt_tokens": completion.prompt_tokens,
                    "completion_tokens": completion.completion_tokens,
                    "latency_ms": completion.latency_ms,
                }
            )

    def events(self) -> list[dict]:
        with self._lock:
            return list(self._events)


class Backend(Protocol):
    backend_id: str
    backend_class: str  # "local" | "external"

    def complete_one(
        self,
        messages: Sequence[Message],
        temperature: float,
        max_tokens: int,
        seed: Optional[int],
        sample_index: int,
    ) -> Completion: ...


@dataclass(frozen=True)
class MockRule:
    pattern: str
    response: str
    sample_index: Optional[int] = None

    def matches(self, prompt: str, sample_index: int) -> bool:
        if self.sample_index is not None and self.sample_index != sample_index:
            return False
        return re.search(self.pattern, prompt, re.DOTALL) is not None


@dataclass(frozen=True)
class MockScript:
    rules: tuple[MockRule, ...]
    default_response: str = "OK"

    def __post_init__(self) -> None:
        for i, rule in enumerate(self.rules):
            for earlier in self.rules[:i]:
                if earlier.pattern == rule.pattern and earlier.sample_index in (
                    None,
                    rule.sample_index,
                ):
                    warnings.warn(
                        f"mock rule {i} (pattern {rule.pattern!r}, sample "
                        f"{rule.sample_index}) is shadowed by an earlier rule",
                        stacklevel=2,
                    )

    def respond(self, prompt: str, sample_index: int) -> str:
        for rule in self.rules:
            if rule.matches(prompt, sample_index):
                return rule.response
        return self.default_response

    @classmethod
    def from_json_file(cls, path) -> "MockScript":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        rules = tuple(
            MockRule(
                pattern=r["pattern"],
                response=r["response"],
                sample_index=r.get("sample_index"),
            )
            for r in data.get("rules", [])
        )
        return cls(rules=rules, default_response=data.get("default", "OK"))


def _flatten_prompt(messages: Sequence[Message]) -> str:
    return "\n".join(str(m.get("content", "")) for m in messages)


def _word_count(text: str) -> int:
    return len(text.split())


class MockBackend:
    """Byte-deterministic scripted backend: (script, prompt, sample index) fixes
    the response. Token counts use a whitespace word count, good enough for
    cost arithmetic in tests."""

    backend_class = "local"

    def __init__(self, script: Optional[MockScript] = None, backend_id: str = "mock") -> None:
        self.script = script or MockScript(rules=())
        self.backend_id = backend_id

    def complete_one(self, messages, temperature, max_tokens, seed, sample_index) -> Completion:
        start = time.monotonic()
        prompt = _flatten_prompt(messages)
        text = self.script.respond(prompt, sample_index)
        return Completion(
            text=text,
            prompt_tokens=_word_count(prompt),
            completion_tokens=_word_count(text),
            latency_ms=int((time.monotonic() - start) * 1000),
            backend_id=self.backend_id,
        )


class OpenAIChatBackend:
    """Client for OpenAI-compatible /chat/completions endpoints.

    The API key is read from an environment variable (never stored); requests
    carry exactly one sample (n=1) so per-sample latency is observable.
    """

    backend_class = "external"

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key_env: str = "OPENAI_API_KEY",
        backend_id: Optional[str] = None,
        timeout_s: float = 120.0,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key_env = api_key_env
        self.backend_id = backend_id or model
        self._client = httpx.Client(timeout=timeout_s)

    def complete_one(self, messages, temperature, max_tokens, seed, sample_index) -> Completion:
        api_key = os.environ.get(self.api_key_env, "")
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        body = {
            "model": self.model,
            "messages": list(messages),
            "temperature": temperature,
            "max_tokens": max_tokens,
            "n": 1,
        }
        if seed is not None:
            body["seed"] = seed + sample_index
        start = time.monotonic()
        try:
            response = self._client.post(
                f"{self.base_url}/chat/completions", json=body, headers=headers
            )
        except httpx.HTTPError as exc:
            raise TransientBackendError(f"transport failure: {exc}") from exc
        latency_ms = int((time.monotonic() - start) * 1000)
        if response.status_code in (429,) or response.status_code >= 500:
            raise TransientBackendError(
                f"backend returned {response.status_code}: {response.text[:200]}"
            )
        if response.status_code >= 400:
            raise NonRetryableBackendError(
                f"backend rejected request ({response.status_code}): {response.text[:200]}"
            )
        try:
            payload = response.json()
            text = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise NonRetryableBackendError(f"malformed backend response: {exc}") from exc
        usage = payload.get("usage", {})
        return Completion(
            text=text or "",
            prompt_tokens=int(usage.get("prompt_tokens", 0)),
            completion_tokens=int(usage.get("completion_tokens", 0)),
            latency_ms=latency_ms,
            backend_id=self.backend_id,
        )


def generate(
    backend: Backend,
    messages: Sequence[Message],
    params: SamplingParams,
    sink: Optional[TelemetrySink] = None,
    concurrency: int = DEFAULT_CONCURRENCY,
    max_retries: int = DEFAULT_MAX_RETRIES,
    _sleep=time.sleep,
) -> GenerationBatch:
    """Draw exactly params.n independent samples from the backend.

    Per-sample transient failures are retried with exponential backoff; a
    sample that exhausts its retry budget lands in the error list. If every
    sample fails, the last cause is raised.
    """
    if not messages:
        raise ValueError("messages must be non-empty")

    def _one(sample_index: int):
        last_exc: Optional[Exception] = None
        for attempt in range(max_retries + 1):
            try:
                return backend.complete_one(
                    messages,
                    params.temperature,
                    params.max_tokens,
                    params.seed,
                    sample_index,
                )
            except TransientBackendError as exc:
                last_exc = exc
                if attempt < max_retries:
                    _sleep(BACKOFF_BASE_S * (2**attempt))
            except NonRetryableBackendError as exc:
                last_exc = exc
                break
        return GenerationError(sample_index, str(last_exc))

    with ThreadPoolExecutor(max_workers=max(1, min(concurrency, params.n))) as pool:
        outcomes = list(pool.map(_one, range(params.n)))

    batch = GenerationBatch(completions=[], errors=[])
    for outcome in outcomes:
        if isinstance(outcome, Completion):
            batch.completions.append(outcome)
            if sink is not None:
                sink.record(outcome)
        else:
            batch.errors.append(outcome)
    if not batch.completions and batch.errors:
        raise GatewayError(
            f"all {params.n} samples failed; last cause: {batch.errors[-1].message}"
        )
    return batch


@dataclass(frozen=True)
class Pricing:
    usd_per_1m_prompt_tokens: float
    usd_per_1m_completion_tokens: float

    def __post_init__(self) -> None:
        if min(self.usd_per_1m_prompt_tokens, self.usd_per_1m_completion_tokens) < 0:
            raise ValueError("prices must be non-negative")


@dataclass(frozen=True)
class PricingTable:
    backends: dict

    @classmethod
    def zero(cls, *backend_ids: str) -> "PricingTable":
        return cls({bid: Pricing(0.0, 0.0) for bid in backend_ids or ("mock",)})

    @classmethod
    def from_json_file(cls, path) -> "PricingTable":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        table = {
            bid: Pricing(
                usd_per_1m_prompt_tokens=float(entry["usd_per_1m_prompt_tokens"]),
                usd_per_1m_completion_tokens=float(entry["usd_per_1m_completion_tokens"]),
            )
            for bid, entry in data.items()
        }
        return cls(table)

    def lookup(self, backend_id: str) -> Pricing:
        if backend_id not in self.backends:
            raise GatewayError(f"no pricing configured for backend {backend_id!r}")
        return self.backends[backend_id]


def cost_of(completions: Sequence[Completion], pricing: PricingTable) -> float:
    """USD cost: sum of token counts weighted by per-million prices."""
    total = 0.0
    for completion in completions:
        rates = pricing.lookup(completion.backend_id)
        total += (
            completion.prompt_tokens * rates.usd_per_1m_prompt_tokens
            + completion.completion_tokens * rates.usd_per_1m_completion_tokens
        ) / 1e6
    return total
