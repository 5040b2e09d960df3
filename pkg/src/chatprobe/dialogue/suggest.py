"""Follow-up suggestions and confirm/decline detection.

Suggestions prefer operations from the same category as the one just
executed, then walk a fixed ring of categories so every operation stays
reachable. An operation is never suggested twice in a session and never
suggested after it has already been executed.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from ..backends.protocol import EmbeddingBackend
from ..backends.similarity import similarity
from ..catalog.ops import Catalog, Category

# Cross-category edges, within-category first: after a Prediction op we
# suggest explanations, after explanations perturbations, and so on around
# the ring. Logic connectives are not executable and never suggested.
CATEGORY_RING: list[Category] = [
    Category.PREDICTION,
    Category.EXPLAIN,
    Category.PERTURBATION,
    Category.NLU,
    Category.DATA,
    Category.META,
    Category.ABOUT,
    Category.FILTER,
]

CONFIRM_TEMPLATES = (
    "yes", "yes please", "sure", "okay", "ok", "sounds good",
    "go ahead", "do it", "yes do that", "please do", "absolutely", "why not",
)
DECLINE_TEMPLATES = (
    "no", "no thanks", "no thank you", "not now", "nope", "skip that",
    "rather not", "maybe later", "not interested", "no need", "do not", "nah",
)
CONFIRMATION_THRESHOLD = 0.6


class Decision(str, Enum):
    CONFIRM = "confirm"
    DECLINE = "decline"
    OTHER = "other"


@dataclass(frozen=True)
class Suggestion:
    op: str
    question: str
    query: str


class SuggestionRule:
    """Catalog-order candidates per category, walked along the category ring."""

    def __init__(self, catalog: Catalog, questions_path: str | Path):
        self.catalog = catalog
        self.templates: dict[str, dict[str, str]] = {}
        for line in Path(questions_path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line:
                row = json.loads(line)
                self.templates[row["op"]] = row
        missing = {op.name for op in catalog.operations()} - self.templates.keys()
        if missing:
            raise ValueError(f"suggestion questions missing for: {sorted(missing)}")

    def candidates(self, last_op: str | None) -> list[str]:
        """All suggestable ops ordered by relatedness to ``last_op``."""
        by_category: dict[Category, list[str]] = {c: [] for c in CATEGORY_RING}
        for op in self.catalog.operations():
            if op.category in by_category:
                by_category[op.category].append(op.name)

        if last_op is not None and last_op in self.catalog:
            start_category = self.catalog.lookup(last_op).category
        else:
            start_category = CATEGORY_RING[0]
        if start_category not in CATEGORY_RING:
            start_category = CATEGORY_RING[0]
        start = CATEGORY_RING.index(start_category)

        ordered: list[str] = []
        for offset in range(len(CATEGORY_RING)):
            category = CATEGORY_RING[(start + offset) % len(CATEGORY_RING)]
            ordered.extend(by_category[category])
        return [name for name in ordered if name != last_op]

    def suggest(
        self,
        last_op: str | None,
        history: set[str],
        instance_id: int | None,
        token: str,
    ) -> Suggestion | None:
        """Highest-priority related op not yet suggested or executed."""
        for name in self.candidates(last_op):
            if name in history:
                continue
            row = self.templates[name]
            values = {"id": instance_id if instance_id is not None else 0, "token": token}
            return Suggestion(
                op=name,
                question=row["question"].format(**values),
                query=row["query"].format(**values),
            )
        return None


_LEADING_DECLINE_RE = re.compile(
    r"^\s*(?:no thank you|no thanks|not now|rather not|no+(?:pe)?|nah)\s*[,.;:!-]*\s*",
    re.I,
)


def strip_decline_prefix(text: str) -> str:
    """Remove a leading refusal so any residual request can still be parsed."""
    return _LEADING_DECLINE_RE.sub("", text, count=1).strip()


def _first_clause(text: str) -> str:
    return re.split(r"[,.;:!?]", text.strip(), maxsplit=1)[0].strip()


def detect_confirmation(
    user_text: str,
    embedding: EmbeddingBackend | None = None,
    threshold: float = CONFIRMATION_THRESHOLD,
) -> Decision:
    """Max similarity of the leading clause against confirm/decline templates."""
    clause = _first_clause(user_text).lower()
    if not clause:
        return Decision.OTHER
    confirm = max(similarity(clause, t, embedding) for t in CONFIRM_TEMPLATES)
    decline = max(similarity(clause, t, embedding) for t in DECLINE_TEMPLATES)
    if confirm < threshold and decline < threshold:
        return Decision.OTHER
    return Decision.CONFIRM if confirm >= decline else Decision.DECLINE
