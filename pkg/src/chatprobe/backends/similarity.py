"""Similarity: cosine over embeddings, lexical fallback when none exist.

The lexical fallback blends token-set Jaccard 50/50 with normalized
character edit similarity, so it rewards both shared vocabulary and
near-identical spellings (useful for fuzzy-matching operation names).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .mock import word_tokens
from .protocol import BackendError, DimensionMismatch, EmbeddingBackend, EmbeddingVector


def embed_or_none(
    embedding: EmbeddingBackend | None, texts: Sequence[str]
) -> list[EmbeddingVector] | None:
    """Embed texts, degrading to None when the backend is missing or down,
    so callers can fall back to lexical similarity."""
    if embedding is None:
        return None
    try:
        return embedding.embed(list(texts))
    except BackendError:
        return None


def cosine(a: EmbeddingVector | np.ndarray, b: EmbeddingVector | np.ndarray) -> float:
    va = a.values if isinstance(a, EmbeddingVector) else np.asarray(a, dtype=np.float64)
    vb = b.values if isinstance(b, EmbeddingVector) else np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape:
        raise DimensionMismatch(f"vector dims differ: {va.shape} vs {vb.shape}")
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(va, vb) / (na * nb))


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance, O(len(a)*len(b))."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost))
        previous = current
    return previous[-1]


def lexical_similarity(a: str, b: str) -> float:
    """50/50 blend of token-set Jaccard and normalized edit similarity, in [0, 1]."""
    a_norm = a.strip().lower()
    b_norm = b.strip().lower()
    if not a_norm and not b_norm:
        return 1.0
    tokens_a = set(word_tokens(a_norm))
    tokens_b = set(word_tokens(b_norm))
    if tokens_a or tokens_b:
        jaccard = len(tokens_a & tokens_b) / len(tokens_a | tokens_b)
    else:
        jaccard = 1.0 if a_norm == b_norm else 0.0
    longest = max(len(a_norm), len(b_norm))
    edit_sim = 1.0 - edit_distance(a_norm, b_norm) / longest if longest else 1.0
    return 0.5 * jaccard + 0.5 * edit_sim


def similarity(
    a: str | EmbeddingVector,
    b: str | EmbeddingVector,
    embedding: EmbeddingBackend | None = None,
) -> float:
    """Similarity of two texts or vectors, in [-1, 1].

    Vectors are compared by cosine. Texts use the embedding backend when one
    is configured, falling back to lexical similarity otherwise.
    """
    if isinstance(a, EmbeddingVector) or isinstance(b, EmbeddingVector):
        if not (isinstance(a, EmbeddingVector) and isinstance(b, EmbeddingVector)):
            raise DimensionMismatch("cannot compare a vector with raw text")
        return cosine(a, b)
    vectors = embed_or_none(embedding, [a, b])
    if vectors is not None:
        return cosine(vectors[0], vectors[1])
    return lexical_similarity(a, b)


def rank_by_similarity(
    query: str,
    candidates: Sequence[str],
    embedding: EmbeddingBackend | None = None,
) -> list[tuple[int, float]]:
    """Indices of ``candidates`` with scores, best first; ties keep list order."""
    vectors = embed_or_none(embedding, [query, *candidates]) if candidates else None
    if vectors is not None:
        query_vec, rest = vectors[0], vectors[1:]
        scored = [(i, cosine(query_vec, v)) for i, v in enumerate(rest)]
    else:
        scored = [(i, lexical_similarity(query, c)) for i, c in enumerate(candidates)]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored
