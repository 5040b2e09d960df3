"""Parser and canonical renderer for the query language.

Canonical form: lowercase keywords, single spaces, filters before operations,
attributes in schema order, defaulted attributes omitted. ``parse_query`` is
deliberately permissive about connective placement (e.g. "rationalize or
augment" parses); the validator flags the misuse.
"""

from __future__ import annotations

from typing import Any

from .ast import (
    AttributeTypeError,
    Connective,
    FilterNode,
    InvalidAst,
    OpNode,
    QueryAst,
    QuerySyntaxError,
    UnknownOperation,
)
from .ops import AttributeKind, Catalog, MISTAKE_MODES, catalog_default

_CONNECTIVES = ("and", "or")

_default_catalog: Catalog | None = None


def _get_default_catalog() -> Catalog:
    global _default_catalog
    if _default_catalog is None:
        _default_catalog = catalog_default()
    return _default_catalog


class _Tokens:
    def __init__(self, text: str):
        self.items = text.lower().split()
        self.pos = 0

    def peek(self, ahead: int = 0) -> str | None:
        index = self.pos + ahead
        return self.items[index] if index < len(self.items) else None

    def next(self) -> str | None:
        tok = self.peek()
        if tok is not None:
            self.pos += 1
        return tok

    def expect(self, *want: str) -> str:
        tok = self.next()
        if tok not in want:
            raise QuerySyntaxError(self.pos, set(want), tok)
        return tok


def _parse_filter(tokens: _Tokens) -> FilterNode:
    head = tokens.next()
    if head == "filter":
        tokens.expect("id")
        raw = tokens.next()
        if raw is None or not raw.isdigit():
            raise QuerySyntaxError(tokens.pos, {"<instance id>"}, raw)
        return FilterNode.by_id(int(raw))
    # includes
    raw = tokens.next()
    if raw is None or raw in _CONNECTIVES:
        raise QuerySyntaxError(tokens.pos, {"<token>"}, raw)
    return FilterNode.includes(raw)


def _consume_op_name_attr(tokens: _Tokens) -> str:
    """An op_name attribute value; the mistake listings are two words."""
    word = tokens.next()
    assert word is not None
    if word == "mistakes" and tokens.peek() in MISTAKE_MODES:
        return f"mistakes {tokens.next()}"
    return word


def _parse_operation(tokens: _Tokens, catalog: Catalog) -> OpNode:
    head = tokens.next()
    assert head is not None
    name = head
    if head == "mistakes":
        mode = tokens.next()
        if mode not in MISTAKE_MODES:
            raise QuerySyntaxError(tokens.pos, set(MISTAKE_MODES), mode)
        name = f"mistakes {mode}"
    if name not in catalog:
        raise UnknownOperation(name)
    spec = catalog.lookup(name)

    attrs: list[tuple[str, Any]] = []
    for schema in spec.attributes:
        tok = tokens.peek()
        if tok is None or tok in _CONNECTIVES:
            if schema.required:
                raise AttributeTypeError(name, schema.name, "missing required value")
            continue
        if schema.kind == AttributeKind.OP_NAME:
            attrs.append((schema.name, _consume_op_name_attr(tokens)))
            continue
        try:
            value = schema.coerce(tok)
        except ValueError as exc:
            if schema.required:
                raise AttributeTypeError(name, schema.name, str(exc)) from None
            continue  # optional attribute not present; token may fit a later one
        tokens.next()
        attrs.append((schema.name, value))

    trailing = tokens.peek()
    if trailing is not None and trailing not in _CONNECTIVES:
        if spec.attributes:
            raise AttributeTypeError(
                name, spec.attributes[-1].name, f"unexpected value {trailing!r}"
            )
        raise QuerySyntaxError(tokens.pos + 1, {"and", "or", "<end>"}, trailing)
    return OpNode(op=name, attrs=tuple(attrs))


def parse_query(text: str, catalog: Catalog | None = None) -> QueryAst:
    """Parse ``text`` into a :class:`QueryAst`.

    Raises :class:`QuerySyntaxError`, :class:`UnknownOperation` or
    :class:`AttributeTypeError`. Contextual checks (id ranges, connective
    misuse, instance scope) are the validator's job.
    """
    catalog = catalog or _get_default_catalog()
    tokens = _Tokens(text)
    if not tokens.items:
        raise QuerySyntaxError(0, {"filter", "includes", "<operation>"})

    filters: list[FilterNode] = []
    operations: list[OpNode] = []
    anomalies: list[str] = []
    filter_seps: set[str] = set()
    connective = Connective.AND

    previous_kind: str | None = None  # "filter" | "op"
    sep: str | None = None
    while True:
        head = tokens.peek()
        if head is None:
            raise QuerySyntaxError(tokens.pos, {"filter", "includes", "<operation>"})
        if head in _CONNECTIVES:
            raise QuerySyntaxError(tokens.pos + 1, {"filter", "includes", "<operation>"}, head)

        if head in ("filter", "includes"):
            node_kind = "filter"
            filters.append(_parse_filter(tokens))
        else:
            node_kind = "op"
            operations.append(_parse_operation(tokens, catalog))

        if sep == "or":
            connective = Connective.OR
            if node_kind == "op" or previous_kind == "op":
                if "or_outside_filters" not in anomalies:
                    anomalies.append("or_outside_filters")
        if sep is not None and node_kind == "filter" and previous_kind == "filter":
            filter_seps.add(sep)

        previous_kind = node_kind
        nxt = tokens.peek()
        if nxt is None:
            break
        sep = tokens.expect("and", "or")

    if len(filter_seps) > 1:
        anomalies.append("mixed_filter_connectives")

    return QueryAst(
        filters=tuple(filters),
        operations=tuple(operations),
        connective=connective,
        anomalies=tuple(anomalies),
    )


def render_query(ast: QueryAst, catalog: Catalog | None = None) -> str:
    """Deterministic canonical rendering of an AST.

    Checks structure (operations resolve, attributes fit their schemas)
    before rendering and raises :class:`InvalidAst` otherwise; contextual
    validity is out of scope here.
    """
    catalog = catalog or _get_default_catalog()
    for op in ast.operations:
        if op.op not in catalog:
            raise InvalidAst(f"unknown operation {op.op!r}")
        spec = catalog.lookup(op.op)
        schema_names = [a.name for a in spec.attributes]
        seen_order = []
        for attr_name, value in op.attrs:
            if attr_name not in schema_names:
                raise InvalidAst(f"{op.op} has no attribute {attr_name!r}")
            try:
                spec.schema_for(attr_name).coerce(str(value))
            except ValueError as exc:
                raise InvalidAst(f"bad value for {op.op}.{attr_name}: {exc}") from None
            seen_order.append(schema_names.index(attr_name))
        if seen_order != sorted(seen_order):
            raise InvalidAst(f"attributes of {op.op} out of schema order")
    for f in ast.filters:
        if f.kind == "id" and (f.id is None or f.id < 0):
            raise InvalidAst("id filter requires a nonnegative id")
        if f.kind == "includes" and not (f.token or "").strip():
            raise InvalidAst("includes filter requires a token")
    if not ast.filters and not ast.operations:
        raise InvalidAst("empty query")
    return ast.render()


def normalize_query(ast: QueryAst, catalog: Catalog | None = None) -> QueryAst:
    """Canonical AST: the result of re-parsing the canonical rendering."""
    return parse_query(render_query(ast, catalog), catalog)


def canonicalize(text: str, catalog: Catalog | None = None) -> str:
    """Canonical string form of a query given in any accepted surface form."""
    return render_query(parse_query(text, catalog), catalog)
