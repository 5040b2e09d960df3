"""JSON-over-HTTP clients for the three capability endpoints.

One POST endpoint per capability:

    POST {base}/v1/generate   {prompt, max_new_tokens, stop, temperature, grammar?, seed?}
                              -> {text, finish_reason}
    POST {base}/v1/embed      {texts: [...]} -> {vectors: [[...], ...]}
    POST {base}/v1/attribute  {input, target, method} -> {tokens: [...], scores: [...]}

All payloads are UTF-8 JSON. HTTP 503 maps to BackendUnavailable; request
timeouts map to Timeout. Each call retries up to the configured count.
"""

from __future__ import annotations

from typing import Any, Sequence

import httpx

from .protocol import (
    AttributionResult,
    AttributionUnavailable,
    BackendConfig,
    BackendUnavailable,
    EmbeddingVector,
    FinishReason,
    GenerationRequest,
    GenerationResponse,
    GrammarUnsupported,
    Timeout,
)


class _HttpCapability:
    def __init__(self, base_url: str, config: BackendConfig, client: httpx.Client | None = None):
        self.base_url = base_url.rstrip("/")
        self.config = config
        self._client = client or httpx.Client(timeout=config.timeout_s)

    def _post(self, path: str, payload: dict[str, Any]) -> dict[str, Any]:
        attempts = self.config.retries + 1
        last_error: Exception | None = None
        for _ in range(attempts):
            try:
                response = self._client.post(f"{self.base_url}{path}", json=payload)
            except httpx.TimeoutException as exc:
                last_error = Timeout(f"{path} timed out after {self.config.timeout_s}s")
                last_error.__cause__ = exc
                continue
            except httpx.HTTPError as exc:
                last_error = BackendUnavailable(f"{path}: {exc}")
                continue
            if response.status_code == 503:
                last_error = BackendUnavailable(f"{path}: backend returned 503")
                continue
            if response.status_code >= 400:
                raise BackendUnavailable(
                    f"{path}: backend returned {response.status_code}: {response.text[:200]}"
                )
            return response.json()
        assert last_error is not None
        raise last_error


class HttpGenerationBackend(_HttpCapability):
    def __init__(self, base_url: str, config: BackendConfig, client: httpx.Client | None = None):
        super().__init__(base_url, config, client)
        self.backend_id = f"http:{self.base_url}"
        self.supports_grammar = config.supports_grammar

    def generate(self, req: GenerationRequest) -> GenerationResponse:
        if req.grammar is not None and not self.supports_grammar:
            raise GrammarUnsupported(
                "backend is configured without grammar support; use post-hoc validation"
            )
        payload: dict[str, Any] = {
            "prompt": req.prompt,
            "max_new_tokens": req.max_new_tokens,
            "stop": list(req.stop_sequences),
            "temperature": req.temperature,
        }
        if req.grammar is not None:
            payload["grammar"] = req.grammar
        if req.seed is not None:
            payload["seed"] = req.seed
        data = self._post("/v1/generate", payload)
        return GenerationResponse(
            text=str(data["text"]),
            finish_reason=FinishReason(data.get("finish_reason", "stop")),
            backend_id=self.backend_id,
        )


class HttpEmbeddingBackend(_HttpCapability):
    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        data = self._post("/v1/embed", {"texts": list(texts)})
        return [EmbeddingVector.of(vec) for vec in data["vectors"]]


class HttpAttributionBackend(_HttpCapability):
    def attribute(self, instance_text: str, target_text: str, method: str) -> AttributionResult:
        try:
            data = self._post(
                "/v1/attribute",
                {"input": instance_text, "target": target_text, "method": method},
            )
        except (BackendUnavailable, Timeout) as exc:
            raise AttributionUnavailable(str(exc)) from exc
        return AttributionResult(
            tokens=tuple(str(t) for t in data["tokens"]),
            scores=tuple(float(s) for s in data["scores"]),
            method=method,
        )


def build_suite(config: BackendConfig, client: httpx.Client | None = None):
    """Construct the capability suite from URLs; unset capabilities stay None.

    When no generation URL is configured the caller is expected to install a
    mock instead (at least one generation backend must exist).
    """
    from .protocol import BackendSuite

    generation = None
    if config.generation_url:
        generation = HttpGenerationBackend(config.generation_url, config, client)
    embedding = None
    if config.embedding_url:
        embedding = HttpEmbeddingBackend(config.embedding_url, config, client)
    attribution = None
    if config.attribution_url:
        attribution = HttpAttributionBackend(config.attribution_url, config, client)
    if generation is None:
        raise ValueError("no generation backend configured; install a mock or set generation_url")
    return BackendSuite(generation=generation, embedding=embedding, attribution=attribution)
