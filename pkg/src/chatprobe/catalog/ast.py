"""AST for the query language: filter nodes, operation nodes, query."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .ops import Catalog, OperationSpec


class QueryError(Exception):
    """Base class for query-language errors."""


class QuerySyntaxError(QueryError):
    def __init__(self, position: int, expected: set[str], found: str | None = None):
        self.position = position
        self.expected = expected
        self.found = found
        want = ", ".join(sorted(expected))
        got = f", got {found!r}" if found is not None else ", got end of input"
        super().__init__(f"syntax error at token {position}: expected {want}{got}")


class UnknownOperation(QueryError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown operation {name!r}")


class AttributeTypeError(QueryError):
    def __init__(self, op: str, attr: str, reason: str):
        self.op = op
        self.attr = attr
        super().__init__(f"bad attribute {attr!r} for {op}: {reason}")


class InvalidAst(QueryError):
    """Raised by render_query when the AST fails validation."""


class Connective(str, Enum):
    AND = "and"
    OR = "or"


@dataclass(frozen=True)
class FilterNode:
    """Either an id filter ("filter id 26") or a token filter ("includes covid")."""

    kind: str  # "id" | "includes"
    id: int | None = None
    token: str | None = None

    @staticmethod
    def by_id(instance_id: int) -> "FilterNode":
        if instance_id < 0:
            raise ValueError("instance id must be nonnegative")
        return FilterNode(kind="id", id=instance_id)

    @staticmethod
    def includes(token: str) -> "FilterNode":
        token = token.strip().lower()
        if not token:
            raise ValueError("includes token must be non-empty")
        return FilterNode(kind="includes", token=token)

    def render(self) -> str:
        if self.kind == "id":
            return f"filter id {self.id}"
        return f"includes {self.token}"


@dataclass(frozen=True)
class OpNode:
    """One operation call; ``attrs`` holds only explicitly given attributes.

    Attributes are (name, value) pairs in the operation's schema order.
    Defaults are filled on demand via :meth:`resolved_attrs` so that the
    canonical rendering can omit them.
    """

    op: str
    attrs: tuple[tuple[str, Any], ...] = ()

    def attr(self, name: str) -> Any:
        for attr_name, value in self.attrs:
            if attr_name == name:
                return value
        return None

    def resolved_attrs(self, catalog: Catalog) -> dict[str, Any]:
        """Attribute values with defaults filled, keyed by schema name."""
        spec = catalog.lookup(self.op)
        explicit = dict(self.attrs)
        resolved: dict[str, Any] = {}
        for schema in spec.attributes:
            if schema.name in explicit:
                resolved[schema.name] = explicit[schema.name]
            else:
                resolved[schema.name] = schema.default
        return resolved

    def render(self) -> str:
        parts = [self.op]
        parts.extend(str(value) for _, value in self.attrs)
        return " ".join(parts)


@dataclass(frozen=True)
class QueryAst:
    """A parsed query: filters, operations, and how the filters combine.

    ``anomalies`` records connective misuse seen at parse time ("or" adjacent
    to an operation, mixed and/or between filters). It is parser provenance,
    not part of the query's structural identity, so it is excluded from
    equality; the validator turns it into violations.
    """

    filters: tuple[FilterNode, ...] = ()
    operations: tuple[OpNode, ...] = ()
    connective: Connective = Connective.AND
    anomalies: tuple[str, ...] = field(default=(), compare=False)

    @property
    def is_pure_filter(self) -> bool:
        return bool(self.filters) and not self.operations

    def op_names(self) -> list[str]:
        return [op.op for op in self.operations]

    def instance_ids(self) -> list[int]:
        return [f.id for f in self.filters if f.kind == "id" and f.id is not None]

    def render(self) -> str:
        sep = f" {self.connective.value} "
        filter_part = sep.join(f.render() for f in self.filters)
        op_part = " and ".join(op.render() for op in self.operations)
        if filter_part and op_part:
            return f"{filter_part} and {op_part}"
        return filter_part or op_part


def resolve_op(catalog: Catalog, name: str) -> OperationSpec:
    try:
        return catalog.lookup(name)
    except Exception:
        raise UnknownOperation(name) from None
