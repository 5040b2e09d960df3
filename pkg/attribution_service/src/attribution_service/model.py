"""A small causal language model for local attribution work.

The model is built in-repo with a fixed initialization seed instead of being
downloaded, so the service is fully offline and the weights are pinned: the
SHA-256 over the parameter bytes is recorded in config and reported by the
health endpoint. Double precision keeps gradient checks tight.

Tokenization is hashed word-level: any input maps deterministically onto the
fixed vocabulary, one token per whitespace-separated word.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass

import torch
from torch import nn

VOCAB_SIZE = 512
DIM = 32
N_HEADS = 2
N_LAYERS = 2
MAX_POSITIONS = 128
INIT_SEED = 20240501

_WORD_RE = re.compile(r"\S+")


def tokenize(text: str) -> list[str]:
    return _WORD_RE.findall(text)


def token_ids(tokens: list[str]) -> list[int]:
    ids = []
    for token in tokens:
        digest = hashlib.md5(token.lower().encode("utf-8")).digest()
        ids.append(int.from_bytes(digest[:4], "big") % VOCAB_SIZE)
    return ids


class _Block(nn.Module):
    def __init__(self, dim: int, heads: int):
        super().__init__()
        self.heads = heads
        self.norm1 = nn.LayerNorm(dim)
        self.qkv = nn.Linear(dim, 3 * dim)
        self.proj = nn.Linear(dim, dim)
        self.norm2 = nn.LayerNorm(dim)
        self.mlp = nn.Sequential(nn.Linear(dim, 4 * dim), nn.GELU(), nn.Linear(4 * dim, dim))

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        seq, dim = x.shape
        head_dim = dim // self.heads
        q, k, v = self.qkv(self.norm1(x)).split(dim, dim=-1)
        q = q.view(seq, self.heads, head_dim).transpose(0, 1)
        k = k.view(seq, self.heads, head_dim).transpose(0, 1)
        v = v.view(seq, self.heads, head_dim).transpose(0, 1)
        scores = q @ k.transpose(-2, -1) / math.sqrt(head_dim)
        causal = torch.triu(torch.ones(seq, seq, dtype=torch.bool, device=x.device), diagonal=1)
        scores = scores.masked_fill(causal, float("-inf"))
        attn = torch.softmax(scores, dim=-1)
        mixed = (attn @ v).transpose(0, 1).reshape(seq, dim)
        x = x + self.proj(mixed)
        x = x + self.mlp(self.norm2(x))
        return x, attn


class TinyCausalLM(nn.Module):
    """Two-layer causal transformer, word-hash vocabulary, double precision."""

    def __init__(self, seed: int = INIT_SEED):
        super().__init__()
        generator_state = torch.random.get_rng_state()
        torch.manual_seed(seed)
        try:
            self.token_embedding = nn.Embedding(VOCAB_SIZE, DIM)
            self.position_embedding = nn.Embedding(MAX_POSITIONS, DIM)
            self.blocks = nn.ModuleList(_Block(DIM, N_HEADS) for _ in range(N_LAYERS))
            self.final_norm = nn.LayerNorm(DIM)
            self.head = nn.Linear(DIM, VOCAB_SIZE, bias=False)
        finally:
            torch.random.set_rng_state(generator_state)
        self.double()
        self.eval()

    # -- interfaces used by the attribution methods ----------------------------

    def embed_ids(self, ids: list[int]) -> torch.Tensor:
        index = torch.tensor(ids, dtype=torch.long)
        return self.token_embedding(index)

    def forward_embeddings(self, embeds: torch.Tensor) -> tuple[torch.Tensor, list[torch.Tensor]]:
        """Run the stack on token embeddings; returns logits and per-layer attention."""
        seq = embeds.shape[0]
        if seq > MAX_POSITIONS:
            raise ValueError(f"sequence of {seq} tokens exceeds the {MAX_POSITIONS} limit")
        positions = torch.arange(seq)
        x = embeds + self.position_embedding(positions)
        attentions = []
        for block in self.blocks:
            x, attn = block(x)
            attentions.append(attn)
        logits = self.head(self.final_norm(x))
        return logits, attentions

    def sequence_score(
        self, input_embeds: torch.Tensor, target_ids: list[int], target_embeds: torch.Tensor
    ) -> torch.Tensor:
        """Sum of target-token log-probabilities given the input prefix."""
        embeds = torch.cat([input_embeds, target_embeds], dim=0)
        logits, _ = self.forward_embeddings(embeds)
        n_input = input_embeds.shape[0]
        total = torch.zeros((), dtype=embeds.dtype)
        log_probs = torch.log_softmax(logits, dim=-1)
        for offset, token_id in enumerate(target_ids):
            position = n_input + offset - 1
            total = total + log_probs[position, token_id]
        return total

    def parameter_hash(self) -> str:
        digest = hashlib.sha256()
        for name, tensor in sorted(self.state_dict().items()):
            digest.update(name.encode())
            digest.update(tensor.detach().cpu().numpy().tobytes())
        return digest.hexdigest()

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())


@dataclass(frozen=True)
class EncodedPair:
    input_tokens: list[str]
    input_ids: list[int]
    target_ids: list[int]


def encode_pair(input_text: str, target_text: str) -> EncodedPair:
    input_tokens = tokenize(input_text)
    if not input_tokens:
        input_tokens = ["<empty>"]
    target_tokens = tokenize(target_text) or ["<empty>"]
    return EncodedPair(
        input_tokens=input_tokens,
        input_ids=token_ids(input_tokens),
        target_ids=token_ids(target_tokens),
    )
