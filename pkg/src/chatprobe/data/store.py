"""Dataset loading and the instance store.

The on-disk format is one JSON object per line with explicit ``id`` and
``label`` keys plus task-specific text fields:

    fact checking:  {"id": 0, "claim": "...", "evidence": "...", "label": "SUPPORT"}
    commonsense QA: {"id": 0, "question": "...", "choices": ["..."] * 5, "label": 2,
                     "positive_explanation": "...?", "negative_explanation": "...?"}

Ids must be dense 0..N-1 in file order. Custom inputs appended at runtime
get ids >= N, assigned monotonically, and are recorded in an append-only
history so a store can be reconstructed by replay.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable


class SchemaError(Exception):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class EmptyDataset(Exception):
    pass


class IdNotFound(Exception):
    def __init__(self, instance_id: int):
        self.instance_id = instance_id
        super().__init__(f"no instance with id {instance_id}")


class Task(str, Enum):
    FACT_CHECKING = "fact_checking"
    COMMONSENSE_QA = "commonsense_qa"


class Source(str, Enum):
    DATASET = "dataset"
    CUSTOM_INPUT = "custom_input"


CQA_CHOICE_COUNT = 5
CQA_LABEL_NAMES = tuple(f"choice_{i + 1}" for i in range(CQA_CHOICE_COUNT))


@dataclass(frozen=True)
class Instance:
    id: int
    fields: dict[str, str]
    gold_label: int | None
    source: Source = Source.DATASET

    def text(self) -> str:
        return " ".join(self.fields.values())

    def choices(self) -> list[str]:
        return [v for k, v in self.fields.items() if k.startswith("choice_")]


@dataclass
class Dataset:
    name: str
    task: Task
    instances: list[Instance]
    label_names: list[str]
    metadata: str = ""
    custom_input_history: list[dict[str, Any]] = field(default_factory=list)
    history_path: Path | None = None
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __len__(self) -> int:
        return len(self.instances)

    @property
    def size(self) -> int:
        """Number of dataset-born instances (custom inputs excluded)."""
        return sum(1 for i in self.instances if i.source == Source.DATASET)

    def custom_input_ids(self) -> list[int]:
        return [i.id for i in self.instances if i.source == Source.CUSTOM_INPUT]

    def by_id(self, instance_id: int) -> Instance:
        for instance in self.instances:
            if instance.id == instance_id:
                return instance
        raise IdNotFound(instance_id)

    def has_id(self, instance_id: int) -> bool:
        return any(i.id == instance_id for i in self.instances)

    def label_name(self, label: int | None) -> str:
        if label is None:
            return "unknown"
        return self.label_names[label]

    @property
    def primary_field(self) -> str:
        return "claim" if self.task == Task.FACT_CHECKING else "question"

    def required_fields(self) -> list[str]:
        if self.task == Task.FACT_CHECKING:
            return ["claim", "evidence"]
        return ["question", *CQA_LABEL_NAMES]


def _normalize_cqa_fields(row: dict[str, Any], line: int) -> dict[str, str]:
    fields: dict[str, str] = {"question": str(row["question"])}
    choices = row.get("choices")
    if choices is not None:
        if len(choices) != CQA_CHOICE_COUNT:
            raise SchemaError(line, f"expected {CQA_CHOICE_COUNT} choices, got {len(choices)}")
        for i, choice in enumerate(choices):
            fields[f"choice_{i + 1}"] = str(choice)
    else:
        for key in CQA_LABEL_NAMES:
            if key not in row:
                raise SchemaError(line, f"missing field {key!r}")
            fields[key] = str(row[key])
    for extra in ("positive_explanation", "negative_explanation"):
        if extra in row:
            fields[extra] = str(row[extra])
    return fields


def _cqa_gold(row: dict[str, Any], fields: dict[str, str], line: int) -> int:
    label = row["label"]
    if isinstance(label, int):
        if not 0 <= label < CQA_CHOICE_COUNT:
            raise SchemaError(line, f"choice label {label} out of range")
        return label
    choices = [fields[k] for k in CQA_LABEL_NAMES]
    try:
        return choices.index(str(label))
    except ValueError:
        raise SchemaError(line, f"label {label!r} is not one of the choices") from None


def load_dataset(path: str | Path, name: str | None = None, metadata: str = "") -> Dataset:
    """Parse a JSONL dataset file; raises SchemaError / EmptyDataset."""
    path = Path(path)
    rows: list[dict[str, Any]] = []
    with path.open("r", encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                row = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise SchemaError(line_no, f"invalid JSON: {exc}") from None
            if "id" not in row or "label" not in row:
                raise SchemaError(line_no, "rows need explicit 'id' and 'label'")
            rows.append(row)
    if not rows:
        raise EmptyDataset(str(path))

    if "claim" in rows[0]:
        task = Task.FACT_CHECKING
    elif "question" in rows[0]:
        task = Task.COMMONSENSE_QA
    else:
        raise SchemaError(1, "cannot infer task: expected 'claim' or 'question' fields")

    seen_ids: set[int] = set()
    instances: list[Instance] = []
    if task == Task.FACT_CHECKING:
        label_names = sorted({str(r["label"]) for r in rows})
    else:
        label_names = list(CQA_LABEL_NAMES)

    for index, row in enumerate(rows):
        line = index + 1
        row_id = row["id"]
        if not isinstance(row_id, int) or row_id < 0:
            raise SchemaError(line, f"id must be a nonnegative integer, got {row_id!r}")
        if row_id in seen_ids:
            raise SchemaError(line, f"duplicate id {row_id}")
        if row_id != index:
            raise SchemaError(line, f"ids must be dense 0..N-1 in order; expected {index}, got {row_id}")
        seen_ids.add(row_id)

        if task == Task.FACT_CHECKING:
            for key in ("claim", "evidence"):
                if key not in row:
                    raise SchemaError(line, f"missing field {key!r}")
            fields = {"claim": str(row["claim"]), "evidence": str(row["evidence"])}
            gold = label_names.index(str(row["label"]))
        else:
            fields = _normalize_cqa_fields(row, line)
            gold = _cqa_gold(row, fields, line)
        instances.append(Instance(id=row_id, fields=fields, gold_label=gold))

    return Dataset(
        name=name or path.stem,
        task=task,
        instances=instances,
        label_names=label_names,
        metadata=metadata,
    )


def add_custom_input(ds: Dataset, fields: dict[str, Any]) -> Instance:
    """Append a user-supplied instance; returns it with the next id."""
    with ds._lock:
        normalized: dict[str, str] = {}
        if ds.task == Task.COMMONSENSE_QA and "choices" in fields:
            fields = dict(fields)
            choices = fields.pop("choices")
            if len(choices) != CQA_CHOICE_COUNT:
                raise SchemaError(0, f"expected {CQA_CHOICE_COUNT} choices, got {len(choices)}")
            for i, choice in enumerate(choices):
                fields[f"choice_{i + 1}"] = choice
        for key in ds.required_fields():
            if key not in fields or not str(fields[key]).strip():
                raise SchemaError(0, f"custom input missing field {key!r}")
            normalized[key] = str(fields[key])
        for key, value in fields.items():
            if key not in normalized and key != "label":
                normalized[key] = str(value)

        gold: int | None = None
        if "label" in fields and fields["label"] is not None:
            label = fields["label"]
            if ds.task == Task.COMMONSENSE_QA:
                gold = _cqa_gold({"label": label}, normalized, 0)
            else:
                if str(label) not in ds.label_names:
                    raise SchemaError(0, f"label {label!r} not in {ds.label_names}")
                gold = ds.label_names.index(str(label))

        next_id = max((i.id for i in ds.instances), default=-1) + 1
        instance = Instance(id=next_id, fields=normalized, gold_label=gold, source=Source.CUSTOM_INPUT)
        ds.instances.append(instance)
        record = {"id": next_id, "fields": normalized, "added_at": time.time()}
        ds.custom_input_history.append(record)
        if ds.history_path is not None:
            with ds.history_path.open("a", encoding="utf-8") as handle:
                handle.write(json.dumps(record, sort_keys=True) + "\n")
        return instance


def replay_history(ds: Dataset, history: Iterable[dict[str, Any]]) -> None:
    """Re-apply recorded custom inputs (e.g. from the history JSONL) in order."""
    for record in history:
        add_custom_input(ds, dict(record["fields"]))


@dataclass(frozen=True)
class CachedPrediction:
    label: str
    raw: str
    timestamp: float


class PredictionCache:
    """Per-session map id -> prediction with atomic insert-or-get."""

    def __init__(self) -> None:
        self._entries: dict[int, CachedPrediction] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, instance_id: int) -> bool:
        return instance_id in self._entries

    def get(self, instance_id: int) -> CachedPrediction | None:
        return self._entries.get(instance_id)

    def insert_or_get(self, instance_id: int, compute) -> CachedPrediction:
        with self._lock:
            cached = self._entries.get(instance_id)
            if cached is not None:
                return cached
        result = compute()
        with self._lock:
            return self._entries.setdefault(instance_id, result)

    def invalidate(self, instance_id: int) -> None:
        with self._lock:
            self._entries.pop(instance_id, None)
