"""The formal query language: catalog, parser, validator, grammar compiler."""

from .ast import (
    AttributeTypeError,
    Connective,
    FilterNode,
    InvalidAst,
    OpNode,
    QueryAst,
    QueryError,
    QuerySyntaxError,
    UnknownOperation,
)
from .ebnf import EbnfError, Grammar, parse_ebnf
from .grammar import EmptyContext, FormalGrammar, GrammarContext, compile_grammar, sample_queries
from .ops import (
    ATTRIBUTION_METHODS,
    AttributeKind,
    AttributeSchema,
    Catalog,
    Category,
    NotFound,
    OperationSpec,
    SCORE_METRICS,
    catalog_default,
)
from .parser import canonicalize, normalize_query, parse_query, render_query
from .validate import ValidationReport, Violation, validate

__all__ = [
    "ATTRIBUTION_METHODS",
    "AttributeKind",
    "AttributeSchema",
    "AttributeTypeError",
    "Catalog",
    "Category",
    "Connective",
    "EbnfError",
    "EmptyContext",
    "FilterNode",
    "FormalGrammar",
    "Grammar",
    "GrammarContext",
    "InvalidAst",
    "NotFound",
    "OpNode",
    "OperationSpec",
    "QueryAst",
    "QueryError",
    "QuerySyntaxError",
    "SCORE_METRICS",
    "UnknownOperation",
    "ValidationReport",
    "Violation",
    "canonicalize",
    "catalog_default",
    "compile_grammar",
    "normalize_query",
    "parse_ebnf",
    "parse_query",
    "render_query",
    "sample_queries",
    "validate",
]
