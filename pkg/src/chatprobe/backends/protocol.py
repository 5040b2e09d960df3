"""Client-side types and errors for the three external capabilities.

A backend is anything that implements one of the three protocols below:
text generation, sentence embedding, feature attribution. The orchestrator
only ever talks to these protocols; whether they are HTTP clients or
in-process mocks is a configuration detail.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol, Sequence, runtime_checkable

import numpy as np


class BackendError(Exception):
    pass


class Timeout(BackendError):
    pass


class BackendUnavailable(BackendError):
    pass


class GrammarUnsupported(BackendError):
    """The generation backend cannot honor a grammar constraint; fall back
    to unconstrained generation plus post-hoc validation."""


class AttributionUnavailable(BackendError):
    pass


class DimensionMismatch(BackendError):
    pass


class FinishReason(str, Enum):
    STOP = "stop"
    LENGTH = "length"
    GRAMMAR = "grammar"


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    max_new_tokens: int = 64
    stop_sequences: tuple[str, ...] = ()
    temperature: float = 0.0
    grammar: str | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.max_new_tokens < 1:
            raise ValueError("max_new_tokens must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class GenerationResponse:
    text: str
    finish_reason: FinishReason
    backend_id: str


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    dim: int

    @staticmethod
    def of(values: Sequence[float] | np.ndarray) -> "EmbeddingVector":
        arr = np.asarray(values, dtype=np.float64)
        return EmbeddingVector(values=arr, dim=int(arr.shape[0]))


@dataclass(frozen=True)
class AttributionResult:
    tokens: tuple[str, ...]
    scores: tuple[float, ...]
    method: str
    instance_id: int | None = None

    def __post_init__(self) -> None:
        if len(self.tokens) != len(self.scores):
            raise ValueError("tokens and scores must have equal length")
        if any(not np.isfinite(s) for s in self.scores):
            raise ValueError("attribution scores must be finite")


@dataclass(frozen=True)
class BackendConfig:
    generation_url: str | None = None
    embedding_url: str | None = None
    attribution_url: str | None = None
    timeout_s: float = 120.0
    retries: int = 1
    supports_grammar: bool = True


@runtime_checkable
class GenerationBackend(Protocol):
    backend_id: str
    supports_grammar: bool

    def generate(self, req: GenerationRequest) -> GenerationResponse: ...


@runtime_checkable
class EmbeddingBackend(Protocol):
    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]: ...


@runtime_checkable
class AttributionBackend(Protocol):
    def attribute(self, instance_text: str, target_text: str, method: str) -> AttributionResult: ...


@dataclass
class BackendSuite:
    """The configured set of capabilities; embedding and attribution are optional."""

    generation: GenerationBackend
    embedding: EmbeddingBackend | None = None
    attribution: AttributionBackend | None = None
    calls: list[str] = field(default_factory=list)
