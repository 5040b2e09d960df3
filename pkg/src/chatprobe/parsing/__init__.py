"""Parsing strategies that turn user utterances into validated queries."""

from .engine import (
    DEFAULT_MAX_NEW_TOKENS,
    DialogueSummary,
    FUZZY_MATCH_THRESHOLD,
    ParseContext,
    ParseResult,
    ParsingEngine,
    Repair,
    Strategy,
    StrategyProfile,
    Unparseable,
)
from .prompts import Demonstration, PromptStore, PromptStoreError, op_slug, render_demonstrations

__all__ = [
    "DEFAULT_MAX_NEW_TOKENS",
    "Demonstration",
    "DialogueSummary",
    "FUZZY_MATCH_THRESHOLD",
    "ParseContext",
    "ParseResult",
    "ParsingEngine",
    "PromptStore",
    "PromptStoreError",
    "Repair",
    "Strategy",
    "StrategyProfile",
    "Unparseable",
    "op_slug",
    "render_demonstrations",
]
