"""Deterministic in-process backends for tests and offline runs.

The generation mock is a pure lookup: an ordered table of prompt substring
patterns to completions. When several patterns occur in a prompt, the one
whose match sits latest in the prompt wins — few-shot prompts put the live
utterance last, so scripted answers target it rather than a demonstration.
Unmatched prompts return a fixed sentinel string, never an error.
"""

from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..catalog.ebnf import parse_ebnf
from .protocol import (
    AttributionResult,
    EmbeddingVector,
    FinishReason,
    GenerationRequest,
    GenerationResponse,
)

SENTINEL = "i do not know what you mean"

EMBED_DIM = 512


def _truncate(text: str, req: GenerationRequest) -> tuple[str, FinishReason]:
    for stop in req.stop_sequences:
        cut = text.find(stop)
        if cut != -1:
            text = text[:cut]
    words = text.split()
    if len(words) > req.max_new_tokens:
        return " ".join(words[: req.max_new_tokens]), FinishReason.LENGTH
    return text, FinishReason.STOP


@dataclass
class ScriptEntry:
    pattern: str
    completion: str


class MockGenerationBackend:
    """Scripted generation: ordered (pattern, completion) table over the prompt."""

    def __init__(
        self,
        script: Iterable[tuple[str, str]] | dict[str, str] = (),
        sentinel: str = SENTINEL,
        supports_grammar: bool = True,
        backend_id: str = "mock-generation",
    ):
        if isinstance(script, dict):
            entries = list(script.items())
        else:
            entries = list(script)
        self.script = [ScriptEntry(p, c) for p, c in entries]
        self.sentinel = sentinel
        self.supports_grammar = supports_grammar
        self.backend_id = backend_id
        self.calls: list[GenerationRequest] = []

    def add(self, pattern: str, completion: str) -> None:
        self.script.append(ScriptEntry(pattern, completion))

    @property
    def call_count(self) -> int:
        return len(self.calls)

    def _lookup(self, prompt: str) -> str | None:
        best_pos = -1
        best: str | None = None
        for entry in self.script:
            pos = prompt.rfind(entry.pattern)
            if pos > best_pos:
                best_pos = pos
                best = entry.completion
        return best

    def generate(self, req: GenerationRequest) -> GenerationResponse:
        self.calls.append(req)
        completion = self._lookup(req.prompt)
        if completion is None:
            completion = self.sentinel
        text, reason = _truncate(completion, req)
        return GenerationResponse(text=text, finish_reason=reason, backend_id=self.backend_id)


class GrammarSamplingBackend:
    """Generation mock that honors grammar constraints by sampling from them.

    With a grammar in the request it returns a random derivation (seeded by
    the request seed and an internal counter); without one it behaves like a
    scripted mock. Used by property tests that need every response to be
    grammar-derivable.
    """

    def __init__(self, seed: int = 0, backend_id: str = "mock-grammar-sampler"):
        self.rng = random.Random(seed)
        self.supports_grammar = True
        self.backend_id = backend_id
        self.calls: list[GenerationRequest] = []

    def generate(self, req: GenerationRequest) -> GenerationResponse:
        self.calls.append(req)
        if req.grammar is None:
            return GenerationResponse(
                text=SENTINEL, finish_reason=FinishReason.STOP, backend_id=self.backend_id
            )
        rng = self.rng if req.seed is None else random.Random((req.seed, len(self.calls)).__hash__())
        text = parse_ebnf(req.grammar).sample(rng)
        text, _ = _truncate(text, req)
        return GenerationResponse(
            text=text, finish_reason=FinishReason.GRAMMAR, backend_id=self.backend_id
        )


def trigram_vector(text: str, dim: int = EMBED_DIM) -> np.ndarray:
    """Hashed character-trigram count vector; deterministic and dependency-free."""
    vec = np.zeros(dim, dtype=np.float64)
    padded = f"  {text.lower()}  "
    for i in range(len(padded) - 2):
        trigram = padded[i : i + 3]
        digest = hashlib.md5(trigram.encode("utf-8")).digest()
        vec[int.from_bytes(digest[:4], "big") % dim] += 1.0
    return vec


class MockEmbeddingBackend:
    """Deterministic embedding: hashed character-trigram counts, dim 512."""

    def __init__(self, dim: int = EMBED_DIM):
        self.dim = dim
        self.calls: list[tuple[str, ...]] = []

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        self.calls.append(tuple(texts))
        return [EmbeddingVector.of(trigram_vector(t, self.dim)) for t in texts]


_TOKEN_RE = re.compile(r"\w+(?:'\w+)?")


def word_tokens(text: str) -> list[str]:
    return _TOKEN_RE.findall(text)


class MockAttributionBackend:
    """Uniform attribution: every token of the input scores 1/n."""

    def __init__(self, method_scores: dict[str, Sequence[float]] | None = None):
        # method_scores lets a test pin exact scores for a method.
        self.method_scores = method_scores or {}
        self.calls: list[tuple[str, str, str]] = []

    def attribute(self, instance_text: str, target_text: str, method: str) -> AttributionResult:
        self.calls.append((instance_text, target_text, method))
        tokens = word_tokens(instance_text)
        if not tokens:
            tokens = [instance_text or "<empty>"]
        pinned = self.method_scores.get(method)
        if pinned is not None:
            scores = tuple(float(s) for s in pinned[: len(tokens)])
            scores = scores + (0.0,) * (len(tokens) - len(scores))
        else:
            scores = tuple(1.0 / len(tokens) for _ in tokens)
        return AttributionResult(tokens=tuple(tokens), scores=scores, method=method)
