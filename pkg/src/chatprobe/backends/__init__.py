"""Backends: generation, embedding, attribution clients plus in-process mocks."""

from .http import HttpAttributionBackend, HttpEmbeddingBackend, HttpGenerationBackend, build_suite
from .mock import (
    EMBED_DIM,
    GrammarSamplingBackend,
    MockAttributionBackend,
    MockEmbeddingBackend,
    MockGenerationBackend,
    SENTINEL,
    trigram_vector,
    word_tokens,
)
from .protocol import (
    AttributionBackend,
    AttributionResult,
    AttributionUnavailable,
    BackendConfig,
    BackendError,
    BackendSuite,
    BackendUnavailable,
    DimensionMismatch,
    EmbeddingBackend,
    EmbeddingVector,
    FinishReason,
    GenerationBackend,
    GenerationRequest,
    GenerationResponse,
    GrammarUnsupported,
    Timeout,
)
from .search import DisabledSearchProvider, SEARCH_DISABLED_NOTICE, SearchProvider, SearchResult
from .similarity import cosine, edit_distance, embed_or_none, lexical_similarity, rank_by_similarity, similarity

__all__ = [
    "AttributionBackend",
    "AttributionResult",
    "AttributionUnavailable",
    "BackendConfig",
    "BackendError",
    "BackendSuite",
    "BackendUnavailable",
    "DimensionMismatch",
    "DisabledSearchProvider",
    "EMBED_DIM",
    "EmbeddingBackend",
    "EmbeddingVector",
    "FinishReason",
    "GenerationBackend",
    "GenerationRequest",
    "GenerationResponse",
    "GrammarSamplingBackend",
    "GrammarUnsupported",
    "HttpAttributionBackend",
    "HttpEmbeddingBackend",
    "HttpGenerationBackend",
    "MockAttributionBackend",
    "MockEmbeddingBackend",
    "MockGenerationBackend",
    "SEARCH_DISABLED_NOTICE",
    "SENTINEL",
    "SearchProvider",
    "SearchResult",
    "Timeout",
    "build_suite",
    "cosine",
    "embed_or_none",
    "edit_distance",
    "lexical_similarity",
    "rank_by_similarity",
    "similarity",
    "trigram_vector",
    "word_tokens",
]
