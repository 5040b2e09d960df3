"""Operation catalog: every query-language operation with its attribute schema.

The catalog is the single machine-readable description of what the query
language can express. It drives the parser, the validator, the grammar
compiler, the stage-1 operation listing used for intent parsing, the tutorial
texts, and the operation browser in the UI.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator


class Category(str, Enum):
    FILTER = "Filter"
    PREDICTION = "Prediction"
    DATA = "Data"
    META = "Meta"
    ABOUT = "About"
    EXPLAIN = "Explain"
    NLU = "NLU"
    PERTURBATION = "Perturbation"
    LOGIC = "Logic"


class AttributeKind(str, Enum):
    """Value domain of a single operation attribute."""

    INSTANCE_ID = "instance_id"    # nonnegative integer
    COUNT = "count"                # positive integer
    TOPK = "topk"                  # positive integer
    TOKEN = "token"                # single whitespace-free word
    METHOD_NAME = "method_name"    # attribution method
    METRIC = "metric"              # scoring metric
    MISTAKE_MODE = "mistake_mode"  # show | count
    OP_NAME = "op_name"            # name of a catalog operation
    EXPERTISE_LEVEL = "expertise_level"


ATTRIBUTION_METHODS = ("input_x_gradient", "attention", "lime", "integrated_gradient")
SCORE_METRICS = ("f1", "precision", "recall", "accuracy")
MISTAKE_MODES = ("show", "count")

_ENUM_VALUES: dict[AttributeKind, tuple[str, ...]] = {
    AttributeKind.METHOD_NAME: ATTRIBUTION_METHODS,
    AttributeKind.METRIC: SCORE_METRICS,
    AttributeKind.MISTAKE_MODE: MISTAKE_MODES,
    AttributeKind.EXPERTISE_LEVEL: ("beginner", "intermediate", "expert"),
}


class CatalogError(Exception):
    pass


class NotFound(CatalogError):
    """Lookup of an operation name that is not in the catalog."""


@dataclass(frozen=True)
class AttributeSchema:
    """Schema of one positional attribute of an operation.

    Attributes with ``required=False`` always carry a default; a default of
    ``None`` means "unset" and is rendered by omission (e.g. the top-k
    attribute, where absence means "all tokens").
    """

    name: str
    kind: AttributeKind
    required: bool = True
    default: Any = None

    def enum_values(self) -> tuple[str, ...] | None:
        return _ENUM_VALUES.get(self.kind)

    def coerce(self, raw: str) -> Any:
        """Turn a lexed token into a typed attribute value, or raise ValueError."""
        if self.kind in (AttributeKind.INSTANCE_ID, AttributeKind.COUNT, AttributeKind.TOPK):
            if not raw.isdigit():
                raise ValueError(f"expected an integer, got {raw!r}")
            value = int(raw)
            if self.kind != AttributeKind.INSTANCE_ID and value < 1:
                raise ValueError(f"expected a positive integer, got {value}")
            return value
        values = self.enum_values()
        if values is not None and raw not in values:
            raise ValueError(f"expected one of {values}, got {raw!r}")
        return raw


@dataclass(frozen=True)
class OperationSpec:
    """One entry of the operation catalog.

    ``name`` is the canonical keyword phrase as it appears in a query. The
    two mistake-listing operations are two-word phrases; everything else is a
    single word.
    """

    name: str
    category: Category
    attributes: tuple[AttributeSchema, ...] = ()
    accepts_custom_input: bool = False
    description: str = ""

    @property
    def keywords(self) -> tuple[str, ...]:
        return tuple(self.name.split())

    def schema_for(self, attr_name: str) -> AttributeSchema:
        for schema in self.attributes:
            if schema.name == attr_name:
                return schema
        raise KeyError(attr_name)


class Catalog:
    """Ordered, immutable collection of operation specs."""

    def __init__(self, operations: list[OperationSpec]):
        self._ops: dict[str, OperationSpec] = {}
        for op in operations:
            if op.name in self._ops:
                raise CatalogError(f"duplicate operation name {op.name!r}")
            self._ops[op.name] = op

    def __iter__(self) -> Iterator[OperationSpec]:
        return iter(self._ops.values())

    def __contains__(self, name: str) -> bool:
        return name in self._ops

    def lookup(self, name: str) -> OperationSpec:
        try:
            return self._ops[name]
        except KeyError:
            raise NotFound(f"unknown operation {name!r}") from None

    def operations(self) -> list[OperationSpec]:
        """All executable operations, excluding the logic connectives."""
        return [op for op in self._ops.values() if op.category != Category.LOGIC]

    def count_operations(self) -> int:
        return len(self.operations())

    def connectives(self) -> list[OperationSpec]:
        return [op for op in self._ops.values() if op.category == Category.LOGIC]

    def names(self) -> list[str]:
        return [op.name for op in self.operations()]

    def custom_input_ops(self) -> list[str]:
        return [op.name for op in self.operations() if op.accepts_custom_input]

    def to_json(self) -> str:
        """Structured export consumed by the UI operation browser."""
        doc = {
            "operations": [
                {
                    "name": op.name,
                    "category": op.category.value,
                    "accepts_custom_input": op.accepts_custom_input,
                    "description": op.description,
                    "attributes": [
                        {
                            "name": a.name,
                            "kind": a.kind.value,
                            "required": a.required,
                            "default": a.default,
                            "values": list(a.enum_values() or ()),
                        }
                        for a in op.attributes
                    ],
                }
                for op in self.operations()
            ],
            "connectives": [op.name for op in self.connectives()],
        }
        return json.dumps(doc, indent=2)


def _attr(name: str, kind: AttributeKind, required: bool = True, default: Any = None) -> AttributeSchema:
    return AttributeSchema(name=name, kind=kind, required=required, default=default)


def catalog_default() -> Catalog:
    """The full built-in catalog: 21 operations plus the two logic connectives."""
    ops = [
        OperationSpec(
            "filter", Category.FILTER,
            (_attr("id", AttributeKind.INSTANCE_ID),),
            description="Access a single instance by its id.",
        ),
        OperationSpec(
            "includes", Category.FILTER,
            (_attr("token", AttributeKind.TOKEN),),
            description="Filter instances by token occurrence.",
        ),
        OperationSpec(
            "predict", Category.PREDICTION,
            accepts_custom_input=True,
            description="Get the prediction for the instances in scope.",
        ),
        OperationSpec(
            "randompredict", Category.PREDICTION,
            (_attr("count", AttributeKind.COUNT),),
            description="Precompute predictions for a random subset of instances.",
        ),
        OperationSpec(
            "mistakes show", Category.PREDICTION,
            description="Show incorrectly predicted instances.",
        ),
        OperationSpec(
            "mistakes count", Category.PREDICTION,
            description="Count incorrectly predicted instances.",
        ),
        OperationSpec(
            "score", Category.PREDICTION,
            (_attr("metric", AttributeKind.METRIC, required=False, default="accuracy"),),
            description="Score predictions against gold labels (f1, precision, recall or accuracy).",
        ),
        OperationSpec(
            "show", Category.DATA,
            description="Show a listing of the instances in scope.",
        ),
        OperationSpec(
            "countdata", Category.DATA,
            description="Count the instances in scope.",
        ),
        OperationSpec(
            "label", Category.DATA,
            description="Describe the label distribution.",
        ),
        OperationSpec(
            "data", Category.META,
            description="Information about the loaded dataset.",
        ),
        OperationSpec(
            "model", Category.META,
            description="Metadata about the backing model.",
        ),
        OperationSpec(
            "function", Category.ABOUT,
            description="Describe what this system can do.",
        ),
        OperationSpec(
            "self", Category.ABOUT,
            description="Self-introduction of the assistant.",
        ),
        OperationSpec(
            "qatutorial", Category.ABOUT,
            (_attr("op_name", AttributeKind.OP_NAME),),
            description="Explain one of the supported operations at the user's expertise level.",
        ),
        OperationSpec(
            "nlpattribute", Category.EXPLAIN,
            (
                _attr("topk", AttributeKind.TOPK, required=False, default=None),
                _attr("method", AttributeKind.METHOD_NAME, required=False, default="attention"),
            ),
            accepts_custom_input=True,
            description="Per-token feature attribution scores for the instance in scope.",
        ),
        OperationSpec(
            "rationalize", Category.EXPLAIN,
            accepts_custom_input=True,
            description="Explain the prediction in natural language.",
        ),
        OperationSpec(
            "keywords", Category.NLU,
            (_attr("topk", AttributeKind.TOPK, required=False, default=10),),
            description="Most common keywords in the data.",
        ),
        OperationSpec(
            "similarity", Category.NLU,
            (_attr("topk", AttributeKind.TOPK, required=False, default=3),),
            accepts_custom_input=True,
            description="Most similar instances to the instance in scope.",
        ),
        OperationSpec(
            "cfe", Category.PERTURBATION,
            accepts_custom_input=True,
            description="Generate a counterfactual: a minimal edit that flips the prediction.",
        ),
        OperationSpec(
            "augment", Category.PERTURBATION,
            accepts_custom_input=True,
            description="Generate a meaning-preserving paraphrase of the instance.",
        ),
        OperationSpec(
            "and", Category.LOGIC,
            description="Chain several operations over the same scope.",
        ),
        OperationSpec(
            "or", Category.LOGIC,
            description="Select the union of several filters.",
        ),
    ]
    return Catalog(ops)
