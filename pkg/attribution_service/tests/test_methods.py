"""Method-level properties: completeness, gradient checks, determinism."""

import math

import pytest
import torch

from attribution_service.methods import (
    UnknownMethod,
    attention_attribution,
    attribute_text,
    integrated_gradients,
)
from attribution_service.model import TinyCausalLM, encode_pair

FIXTURE_INPUTS = [
    ("the covid vaccine reduces severe illness in adults", "SUPPORT"),
    ("masks lower the spread of covid indoors", "SUPPORT"),
    ("vitamin c cures coronavirus infections within days", "REFUTE"),
    ("booster doses raise antibody levels", "SUPPORT"),
    ("the virus cannot survive in warm climates", "REFUTE"),
    ("hand washing reduces the risk of infection", "SUPPORT"),
    ("drinking hot water eliminates the virus", "REFUTE"),
    ("where would you keep milk cold at home", "refrigerator"),
    ("what do people do at a gym", "exercise"),
    ("what melts when it gets warm", "ice"),
]


@pytest.fixture(scope="module")
def model():
    return TinyCausalLM()


class TestIntegratedGradients:
    def test_completeness_within_5_percent_on_fixtures(self, model):
        for text, target in FIXTURE_INPUTS:
            pair = encode_pair(text, target)
            scores, residual = integrated_gradients(model, pair, steps=32)
            embeds = model.embed_ids(pair.input_ids)
            with torch.no_grad():
                target_embeds = model.embed_ids(pair.target_ids)
                score_x = model.sequence_score(embeds, pair.target_ids, target_embeds).item()
                score_b = model.sequence_score(
                    torch.zeros_like(embeds), pair.target_ids, target_embeds
                ).item()
            delta = abs(score_x - score_b)
            assert residual < 0.05 * max(delta, 1e-9), (text, residual, delta)
            assert len(scores) == len(pair.input_tokens)

    def test_more_steps_tighten_the_residual(self, model):
        pair = encode_pair("the virus cannot survive in warm climates", "REFUTE")
        _, coarse = integrated_gradients(model, pair, steps=2)
        _, fine = integrated_gradients(model, pair, steps=64)
        assert fine <= coarse + 1e-12

    def test_steps_must_be_positive(self, model):
        with pytest.raises(ValueError):
            integrated_gradients(model, encode_pair("a b", "c"), steps=0)


class TestGradientAgainstFiniteDifferences:
    def test_relative_agreement_1e3_on_probe(self, model):
        pair = encode_pair("warm ice melts", "water")
        embeds = model.embed_ids(pair.input_ids).detach()
        target_embeds = model.embed_ids(pair.target_ids).detach()

        point = embeds.clone().requires_grad_(True)
        score = model.sequence_score(point, pair.target_ids, target_embeds)
        (gradient,) = torch.autograd.grad(score, point)

        h = 1e-5
        checked = 0
        for token_index in range(embeds.shape[0]):
            for dim_index in (0, 7, 31):
                plus = embeds.clone()
                plus[token_index, dim_index] += h
                minus = embeds.clone()
                minus[token_index, dim_index] -= h
                with torch.no_grad():
                    f_plus = model.sequence_score(plus, pair.target_ids, target_embeds).item()
                    f_minus = model.sequence_score(minus, pair.target_ids, target_embeds).item()
                numeric = (f_plus - f_minus) / (2 * h)
                analytic = gradient[token_index, dim_index].item()
                scale = max(abs(numeric), abs(analytic), 1e-8)
                assert abs(numeric - analytic) / scale < 1e-3, (token_index, dim_index)
                checked += 1
        assert checked == 9


class TestAttention:
    def test_nonnegative_and_normalized(self, model):
        for text, target in FIXTURE_INPUTS[:5]:
            scores = attention_attribution(model, encode_pair(text, target))
            assert all(s >= 0 for s in scores)
            assert sum(scores) == pytest.approx(1.0, abs=1e-9)


class TestContracts:
    @pytest.mark.parametrize(
        "method", ["input_x_gradient", "attention", "lime", "integrated_gradient"]
    )
    def test_token_score_alignment_and_finiteness(self, model, method):
        for text, target in FIXTURE_INPUTS[:4]:
            result = attribute_text(model, text, target, method)
            assert len(result["tokens"]) == len(result["scores"])
            assert all(math.isfinite(s) for s in result["scores"])

    @pytest.mark.parametrize(
        "method", ["input_x_gradient", "attention", "lime", "integrated_gradient"]
    )
    def test_determinism(self, model, method):
        text, target = FIXTURE_INPUTS[0]
        first = attribute_text(model, text, target, method)
        second = attribute_text(model, text, target, method)
        assert first == second

    def test_unknown_method_rejected(self, model):
        with pytest.raises(UnknownMethod):
            attribute_text(model, "a b c", "d", "saliency")

    def test_empty_input_still_aligned(self, model):
        result = attribute_text(model, "", "label", "attention")
        assert len(result["tokens"]) == len(result["scores"]) == 1

    def test_model_initialization_is_pinned(self, model):
        from attribution_service import config

        assert model.parameter_hash() == config.PINNED_MODEL_HASH
        assert model.parameter_count() < 160_000_000
