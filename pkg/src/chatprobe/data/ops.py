"""Data-level primitives: filtering, counting, keywords, nearest instances."""

from __future__ import annotations

from collections import Counter

from ..backends.protocol import EmbeddingBackend
from ..backends.similarity import cosine, embed_or_none, lexical_similarity
from ..backends.mock import word_tokens
from ..catalog.ast import Connective, FilterNode
from .stopwords import STOPWORDS
from .store import Dataset, Instance

PAGE_SIZE = 10


def _matches_token(instance: Instance, token: str) -> bool:
    token = token.lower()
    for value in instance.fields.values():
        if token in (t.lower() for t in word_tokens(value)):
            return True
    return False


def apply_filters(
    ds: Dataset,
    filters: list[FilterNode] | tuple[FilterNode, ...],
    connective: Connective = Connective.AND,
) -> list[Instance]:
    """Resolve a filter chain to instances: Or = union, And = intersection."""
    if not filters:
        return list(ds.instances)
    sets: list[set[int]] = []
    for f in filters:
        if f.kind == "id":
            assert f.id is not None
            sets.append({ds.by_id(f.id).id})
        else:
            assert f.token is not None
            sets.append({i.id for i in ds.instances if _matches_token(i, f.token)})
    if connective == Connective.OR:
        selected = set().union(*sets)
    else:
        selected = set.intersection(*sets)
    return [i for i in ds.instances if i.id in selected]


def countdata(subset: list[Instance]) -> int:
    return len(subset)


def label_distribution(ds: Dataset, subset: list[Instance] | None = None) -> dict[str, int]:
    """Counts per label name; labels with zero occurrences are included."""
    instances = ds.instances if subset is None else subset
    counts = {name: 0 for name in ds.label_names}
    for instance in instances:
        if instance.gold_label is not None:
            counts[ds.label_name(instance.gold_label)] += 1
    return counts


def render_instance(ds: Dataset, instance: Instance) -> str:
    parts = [f"[{instance.id}]"]
    for key, value in instance.fields.items():
        parts.append(f"{key}: {value}")
    if instance.gold_label is not None:
        parts.append(f"label: {ds.label_name(instance.gold_label)}")
    return " | ".join(parts)


def show(ds: Dataset, subset: list[Instance], page_size: int = PAGE_SIZE) -> str:
    """Paged listing with a continuation marker past ``page_size`` rows."""
    if not subset:
        return "(no matching instances)"
    lines = [render_instance(ds, i) for i in subset[:page_size]]
    remaining = len(subset) - page_size
    if remaining > 0:
        lines.append(f"... and {remaining} more")
    return "\n".join(lines)


def keywords(ds: Dataset, k: int, subset: list[Instance] | None = None) -> list[tuple[str, int]]:
    """Top-k tokens by frequency after lowercasing and stopword removal.

    Ties break lexicographically, so the result is independent of instance
    order.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    counts: Counter[str] = Counter()
    for instance in subset if subset is not None else ds.instances:
        for value in instance.fields.values():
            for token in word_tokens(value.lower()):
                if token not in STOPWORDS:
                    counts[token] += 1
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]


def similar_topk(
    ds: Dataset,
    anchor: Instance,
    k: int,
    embedding: EmbeddingBackend | None = None,
) -> list[tuple[Instance, float]]:
    """k nearest instances to ``anchor`` (anchor excluded), best first.

    Uses embedding cosine when an embedding backend is available, lexical
    similarity otherwise. Ties break by ascending id.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    others = [i for i in ds.instances if i.id != anchor.id]
    if not others:
        return []
    vectors = embed_or_none(embedding, [anchor.text(), *[i.text() for i in others]])
    if vectors is not None:
        anchor_vec, rest = vectors[0], vectors[1:]
        scored = [(inst, cosine(anchor_vec, vec)) for inst, vec in zip(others, rest)]
    else:
        scored = [(inst, lexical_similarity(anchor.text(), inst.text())) for inst in others]
    scored.sort(key=lambda pair: (-pair[1], pair[0].id))
    return scored[:k]
