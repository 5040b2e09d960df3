"""The four attribution methods over the local model.

Every method returns one scalar per input token. Contributions toward
multi-token targets are summed over the target tokens (the score is the sum
of target log-probabilities).
"""

from __future__ import annotations

import hashlib
import random

import numpy as np
import torch

from .model import EncodedPair, TinyCausalLM, encode_pair

METHODS = ("input_x_gradient", "attention", "lime", "integrated_gradient")
DEFAULT_IG_STEPS = 32
LIME_SAMPLE_FACTOR = 4
LIME_KERNEL_WIDTH = 0.4


class UnknownMethod(Exception):
    pass


def _score_for_input(model: TinyCausalLM, input_embeds: torch.Tensor, pair: EncodedPair) -> torch.Tensor:
    target_embeds = model.embed_ids(pair.target_ids)
    return model.sequence_score(input_embeds, pair.target_ids, target_embeds)


def _input_gradient(model: TinyCausalLM, input_embeds: torch.Tensor, pair: EncodedPair) -> torch.Tensor:
    embeds = input_embeds.clone().detach().requires_grad_(True)
    score = _score_for_input(model, embeds, pair)
    (gradient,) = torch.autograd.grad(score, embeds)
    return gradient


def input_x_gradient(model: TinyCausalLM, pair: EncodedPair) -> list[float]:
    embeds = model.embed_ids(pair.input_ids)
    gradient = _input_gradient(model, embeds, pair)
    return (embeds * gradient).sum(dim=-1).tolist()


def integrated_gradients(
    model: TinyCausalLM, pair: EncodedPair, steps: int = DEFAULT_IG_STEPS
) -> tuple[list[float], float]:
    """Midpoint-rule path integral from a zero-embedding baseline.

    Returns the per-token attributions and the completeness residual
    |sum(attr) - (score(x) - score(baseline))|.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    embeds = model.embed_ids(pair.input_ids).detach()
    baseline = torch.zeros_like(embeds)
    delta = embeds - baseline

    accumulated = torch.zeros_like(embeds)
    for k in range(1, steps + 1):
        alpha = (k - 0.5) / steps
        point = (baseline + alpha * delta).requires_grad_(True)
        score = _score_for_input(model, point, pair)
        (gradient,) = torch.autograd.grad(score, point)
        accumulated += gradient
    attributions = (delta * accumulated / steps).sum(dim=-1)

    with torch.no_grad():
        score_input = _score_for_input(model, embeds, pair).item()
        score_baseline = _score_for_input(model, baseline, pair).item()
    residual = abs(attributions.sum().item() - (score_input - score_baseline))
    return attributions.tolist(), residual


def attention_attribution(model: TinyCausalLM, pair: EncodedPair) -> list[float]:
    """Last-layer attention from the target positions onto the input tokens,
    averaged over heads and target positions, normalized to sum to one."""
    with torch.no_grad():
        input_embeds = model.embed_ids(pair.input_ids)
        target_embeds = model.embed_ids(pair.target_ids)
        embeds = torch.cat([input_embeds, target_embeds], dim=0)
        _, attentions = model.forward_embeddings(embeds)
    last = attentions[-1].mean(dim=0)  # heads -> mean; (seq, seq)
    n_input = len(pair.input_ids)
    target_rows = last[n_input:, :n_input]
    if target_rows.shape[0] == 0:
        target_rows = last[n_input - 1 : n_input, :n_input]
    scores = target_rows.mean(dim=0)
    total = scores.sum().item()
    if total > 0:
        scores = scores / total
    return scores.tolist()


def lime_attribution(model: TinyCausalLM, pair: EncodedPair) -> list[float]:
    """Perturbation-based linear surrogate: mask random token subsets (zeroed
    embeddings), fit weighted least squares on the score deltas."""
    n = len(pair.input_ids)
    embeds = model.embed_ids(pair.input_ids).detach()
    seed_material = hashlib.md5(
        (" ".join(pair.input_tokens) + "|" + "|".join(map(str, pair.target_ids))).encode()
    ).digest()
    rng = random.Random(int.from_bytes(seed_material[:8], "big"))

    n_samples = LIME_SAMPLE_FACTOR * n + 10
    masks = [[1] * n]  # always include the unperturbed input
    for _ in range(n_samples - 1):
        mask = [rng.randint(0, 1) for _ in range(n)]
        if not any(mask):
            mask[rng.randrange(n)] = 1
        masks.append(mask)

    scores = []
    with torch.no_grad():
        for mask in masks:
            masked = embeds * torch.tensor(mask, dtype=embeds.dtype).unsqueeze(-1)
            scores.append(_score_for_input(model, masked, pair).item())

    design = np.array(masks, dtype=np.float64)
    design = np.hstack([design, np.ones((design.shape[0], 1))])  # intercept
    targets = np.array(scores)
    distances = 1.0 - design[:, :n].mean(axis=1)
    weights = np.exp(-(distances**2) / LIME_KERNEL_WIDTH**2)
    w_sqrt = np.sqrt(weights)[:, None]
    coefficients, *_ = np.linalg.lstsq(design * w_sqrt, targets * w_sqrt[:, 0], rcond=None)
    return coefficients[:n].tolist()


def attribute_text(
    model: TinyCausalLM,
    input_text: str,
    target_text: str,
    method: str,
    steps: int = DEFAULT_IG_STEPS,
) -> dict:
    if method not in METHODS:
        raise UnknownMethod(f"method must be one of {METHODS}, got {method!r}")
    pair = encode_pair(input_text, target_text)
    if method == "input_x_gradient":
        scores = input_x_gradient(model, pair)
    elif method == "integrated_gradient":
        scores, _ = integrated_gradients(model, pair, steps)
    elif method == "attention":
        scores = attention_attribution(model, pair)
    else:
        scores = lime_attribution(model, pair)
    return {"tokens": pair.input_tokens, "scores": scores, "method": method}
