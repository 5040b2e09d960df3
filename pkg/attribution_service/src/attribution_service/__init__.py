"""Token attribution microservice over a small local causal language model."""

from .methods import METHODS, UnknownMethod, attribute_text, integrated_gradients
from .model import TinyCausalLM, encode_pair, tokenize
from .service import create_app

__all__ = [
    "METHODS",
    "TinyCausalLM",
    "UnknownMethod",
    "attribute_text",
    "create_app",
    "encode_pair",
    "integrated_gradients",
    "tokenize",
]
