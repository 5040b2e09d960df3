"""Mock backends, similarity, and the HTTP client wire behavior."""

import hashlib

import httpx
import numpy as np
import pytest

from chatprobe.backends import (
    BackendConfig,
    BackendUnavailable,
    DimensionMismatch,
    EMBED_DIM,
    FinishReason,
    GenerationRequest,
    GrammarSamplingBackend,
    GrammarUnsupported,
    HttpAttributionBackend,
    HttpEmbeddingBackend,
    HttpGenerationBackend,
    MockAttributionBackend,
    MockEmbeddingBackend,
    MockGenerationBackend,
    SENTINEL,
    cosine,
    lexical_similarity,
    rank_by_similarity,
    similarity,
)
from chatprobe.backends.protocol import AttributionUnavailable, EmbeddingVector, Timeout
from chatprobe.catalog import GrammarContext, catalog_default, compile_grammar, parse_query, validate


class TestMockGeneration:
    def test_scripted_lookup(self):
        mock = MockGenerationBackend([("rationale for id 26", "filter id 26 and rationalize")])
        out = mock.generate(GenerationRequest(prompt="please give the rationale for id 26 now"))
        assert out.text == "filter id 26 and rationalize"

    def test_unmatched_prompt_returns_sentinel(self):
        mock = MockGenerationBackend([("abc", "x")])
        assert mock.generate(GenerationRequest(prompt="nothing here")).text == SENTINEL

    def test_latest_match_in_prompt_wins(self):
        mock = MockGenerationBackend([("first", "A"), ("second", "B")])
        out = mock.generate(GenerationRequest(prompt="first ... second"))
        assert out.text == "B"
        out = mock.generate(GenerationRequest(prompt="second ... first"))
        assert out.text == "A"

    def test_max_new_tokens_budget(self):
        mock = MockGenerationBackend([("p", "one two three")])
        out = mock.generate(GenerationRequest(prompt="p", max_new_tokens=1))
        assert out.text == "one"
        assert out.finish_reason == FinishReason.LENGTH

    def test_stop_sequences(self):
        mock = MockGenerationBackend([("p", "keep this\nnot this")])
        out = mock.generate(GenerationRequest(prompt="p", stop_sequences=("\n",)))
        assert out.text == "keep this"

    def test_seeded_requests_are_deterministic(self):
        mock = MockGenerationBackend([("p", "answer")])
        req = GenerationRequest(prompt="p", temperature=0.0, seed=1)
        assert mock.generate(req) == mock.generate(req)

    def test_request_invariants(self):
        with pytest.raises(ValueError):
            GenerationRequest(prompt="x", max_new_tokens=0)
        with pytest.raises(ValueError):
            GenerationRequest(prompt="x", temperature=-0.1)


class TestGrammarSamplingMock:
    def test_honors_grammar(self):
        catalog = catalog_default()
        grammar = compile_grammar(catalog, GrammarContext(dataset_size=10))
        mock = GrammarSamplingBackend(seed=3)
        for _ in range(50):
            out = mock.generate(GenerationRequest(prompt="x", grammar=grammar.text, max_new_tokens=64))
            assert out.finish_reason == FinishReason.GRAMMAR
            assert validate(parse_query(out.text), catalog, 10).ok


def _trigram_vector_oracle(text: str, dim: int = EMBED_DIM) -> np.ndarray:
    """Brute-force reimplementation used to cross-check the mock embedding."""
    vec = np.zeros(dim)
    padded = f"  {text.lower()}  "
    for i in range(len(padded) - 2):
        digest = hashlib.md5(padded[i : i + 3].encode()).digest()
        vec[int.from_bytes(digest[:4], "big") % dim] += 1
    return vec


class TestMockEmbedding:
    def test_identical_texts_identical_vectors(self):
        mock = MockEmbeddingBackend()
        a, b = mock.embed(["a", "a"])
        assert np.array_equal(a.values, b.values)
        assert a.dim == EMBED_DIM

    def test_self_similarity_is_one(self):
        mock = MockEmbeddingBackend()
        v1, v2 = mock.embed(["augment", "augment"])
        assert cosine(v1, v2) == pytest.approx(1.0, abs=1e-6)

    def test_matches_direct_computation(self):
        mock = MockEmbeddingBackend()
        for text in ["show attributions", "nlpattribute", "countdata"]:
            (vec,) = mock.embed([text])
            assert np.array_equal(vec.values, _trigram_vector_oracle(text))

    def test_related_terms_rank_higher(self):
        mock = MockEmbeddingBackend()
        query, close, far = mock.embed(["show attributions", "nlpattribute", "countdata"])
        assert cosine(query, close) > cosine(query, far)

    def test_nonempty_text_has_nonzero_norm(self):
        (vec,) = MockEmbeddingBackend().embed(["x"])
        assert np.linalg.norm(vec.values) > 0


class TestSimilarity:
    def test_cosine_self_and_negation(self):
        v = EmbeddingVector.of([1.0, 2.0, 3.0])
        neg = EmbeddingVector.of([-1.0, -2.0, -3.0])
        assert cosine(v, v) == pytest.approx(1.0)
        assert cosine(v, neg) == pytest.approx(-1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cosine(EmbeddingVector.of([1.0]), EmbeddingVector.of([1.0, 2.0]))

    def test_lexical_identity(self):
        assert lexical_similarity("filter id 5", "filter id 5") == 1.0

    def test_lexical_formula_matches_brute_force(self):
        # jaccard and levenshtein recomputed by hand for a small case
        a, b = "show data", "show the data"
        jaccard = len({"show", "data"} & {"show", "the", "data"}) / len({"show", "the", "data"})
        # levenshtein("show data", "show the data") = 4 insertions
        edit_sim = 1 - 4 / len("show the data")
        assert lexical_similarity(a, b) == pytest.approx(0.5 * jaccard + 0.5 * edit_sim)

    def test_similarity_dispatch(self):
        mock = MockEmbeddingBackend()
        assert similarity("same", "same", mock) == pytest.approx(1.0, abs=1e-6)
        assert similarity("same", "same", None) == 1.0
        with pytest.raises(DimensionMismatch):
            similarity(EmbeddingVector.of([1.0]), "text")

    def test_failing_embedding_backend_falls_back_to_lexical(self):
        class DownEmbedding:
            def embed(self, texts):
                raise BackendUnavailable("embedding service down")

        down = DownEmbedding()
        assert similarity("filter id 5", "filter id 5", down) == 1.0
        ranked = rank_by_similarity("rationalise", ["rationalize", "countdata"], down)
        assert ranked[0][0] == 0
        assert ranked[0][1] == pytest.approx(lexical_similarity("rationalise", "rationalize"))


class TestMockAttribution:
    def test_uniform_scores(self):
        mock = MockAttributionBackend()
        result = mock.attribute("a b c d", "label", "attention")
        assert result.tokens == ("a", "b", "c", "d")
        assert result.scores == (0.25, 0.25, 0.25, 0.25)

    def test_token_score_alignment_property(self):
        import random

        mock = MockAttributionBackend()
        rng = random.Random(0)
        words = ["covid", "vaccine", "masks", "virus", "evidence", "claim"]
        for _ in range(50):
            text = " ".join(rng.choices(words, k=rng.randint(1, 12)))
            result = mock.attribute(text, "x", "lime")
            assert len(result.tokens) == len(result.scores)


class _FakeTransport(httpx.BaseTransport):
    def __init__(self, handler):
        self.handler = handler

    def handle_request(self, request):
        return self.handler(request)


def _client_with(handler):
    return httpx.Client(transport=_FakeTransport(handler))


class TestHttpClients:
    def test_generate_round_trip(self):
        def handler(request):
            assert request.url.path == "/v1/generate"
            import json

            body = json.loads(request.content)
            assert body["prompt"] == "hello"
            assert body["stop"] == ["\n"]
            return httpx.Response(200, json={"text": "world", "finish_reason": "stop"})

        backend = HttpGenerationBackend("http://backend", BackendConfig(), _client_with(handler))
        out = backend.generate(GenerationRequest(prompt="hello", stop_sequences=("\n",)))
        assert out.text == "world"

    def test_503_maps_to_unavailable(self):
        def handler(request):
            return httpx.Response(503)

        backend = HttpGenerationBackend(
            "http://backend", BackendConfig(retries=1), _client_with(handler)
        )
        with pytest.raises(BackendUnavailable):
            backend.generate(GenerationRequest(prompt="x"))

    def test_timeout_maps_to_timeout(self):
        def handler(request):
            raise httpx.ConnectTimeout("slow")

        backend = HttpGenerationBackend("http://b", BackendConfig(retries=0), _client_with(handler))
        with pytest.raises(Timeout):
            backend.generate(GenerationRequest(prompt="x"))

    def test_grammar_unsupported_short_circuits(self):
        def handler(request):  # pragma: no cover - must not be called
            raise AssertionError("no network call expected")

        backend = HttpGenerationBackend(
            "http://b", BackendConfig(supports_grammar=False), _client_with(handler)
        )
        with pytest.raises(GrammarUnsupported):
            backend.generate(GenerationRequest(prompt="x", grammar="query ::= \"a\" ;"))

    def test_embed_and_attribute_round_trip(self):
        def handler(request):
            if request.url.path == "/v1/embed":
                return httpx.Response(200, json={"vectors": [[1.0, 0.0], [0.0, 1.0]]})
            return httpx.Response(200, json={"tokens": ["a", "b"], "scores": [0.5, 0.5]})

        embed = HttpEmbeddingBackend("http://b", BackendConfig(), _client_with(handler))
        vecs = embed.embed(["x", "y"])
        assert [v.dim for v in vecs] == [2, 2]
        attr = HttpAttributionBackend("http://b", BackendConfig(), _client_with(handler))
        result = attr.attribute("a b", "t", "lime")
        assert result.tokens == ("a", "b")

    def test_attribution_error_degrades_gracefully(self):
        def handler(request):
            return httpx.Response(503)

        attr = HttpAttributionBackend("http://b", BackendConfig(retries=0), _client_with(handler))
        with pytest.raises(AttributionUnavailable):
            attr.attribute("a", "t", "lime")
