"""Compile the operation catalog into a constrained-decoding grammar.

The compiled grammar derives exactly the queries that validate cleanly for
the given context: ids are enumerated, instance-scoped operations require a
filter unless the context already holds an active instance, and "or" can
only join two or more filters.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .ast import QueryAst
from .ebnf import Alt, Grammar, Lexeme, Opt, Rep, RuleRef, Seq, Terminal, parse_ebnf
from .ops import AttributeKind, Catalog, Category, OperationSpec


class EmptyContext(Exception):
    """No ids to filter by and no custom inputs: the grammar would be empty."""


@dataclass(frozen=True)
class GrammarContext:
    dataset_size: int
    custom_input_ids: frozenset[int] = frozenset()
    has_instance_context: bool = False

    def valid_ids(self) -> list[int]:
        ids = set(range(self.dataset_size)) | set(self.custom_input_ids)
        return sorted(ids)


@dataclass(frozen=True)
class FormalGrammar:
    text: str
    start_symbol: str = "query"

    def sample(self, rng: random.Random) -> str:
        return parse_ebnf(self.text, self.start_symbol).sample(rng)


def _op_sequence(spec: OperationSpec) -> object:
    items: list[object] = [Terminal(word) for word in spec.keywords]
    for attr in spec.attributes:
        if attr.kind in (AttributeKind.COUNT, AttributeKind.TOPK):
            sym: object = Lexeme("POSINT")
        elif attr.kind == AttributeKind.TOKEN:
            sym = Lexeme("WORD")
        elif attr.kind == AttributeKind.METHOD_NAME:
            sym = RuleRef("method")
        elif attr.kind == AttributeKind.METRIC:
            sym = RuleRef("metric")
        elif attr.kind == AttributeKind.OP_NAME:
            sym = RuleRef("opname")
        elif attr.kind == AttributeKind.INSTANCE_ID:
            sym = RuleRef("instance_id")
        else:
            continue
        items.append(sym if attr.required else Opt(sym))
    return items[0] if len(items) == 1 else Seq(tuple(items))


def _name_sequence(spec: OperationSpec) -> object:
    words = [Terminal(w) for w in spec.keywords]
    return words[0] if len(words) == 1 else Seq(tuple(words))


def compile_grammar(catalog: Catalog, context: GrammarContext) -> FormalGrammar:
    ids = context.valid_ids()
    if not ids:
        raise EmptyContext("no dataset instances and no custom inputs")

    grammar = Grammar(start="query")

    executable = [
        op for op in catalog.operations() if op.category != Category.FILTER
    ]
    scoped = [op for op in executable if op.accepts_custom_input]
    unscoped = [op for op in executable if not op.accepts_custom_input]

    bare_op = "any_op" if context.has_instance_context else "unscoped_op"
    grammar.define(
        "query",
        Alt((RuleRef("scoped_query"), RuleRef("bare_query"))),
    )
    grammar.define(
        "scoped_query",
        Seq((RuleRef("filter_chain"), Terminal("and"), RuleRef("any_op"),
             Rep(Seq((Terminal("and"), RuleRef("any_op")))))),
    )
    grammar.define(
        "bare_query",
        Seq((RuleRef(bare_op), Rep(Seq((Terminal("and"), RuleRef(bare_op)))))),
    )
    grammar.define(
        "filter_chain",
        Alt((
            Seq((RuleRef("filter"), Rep(Seq((Terminal("and"), RuleRef("filter")))))),
            Seq((RuleRef("filter"), Terminal("or"), RuleRef("filter"),
                 Rep(Seq((Terminal("or"), RuleRef("filter")))))),
        )),
    )
    grammar.define(
        "filter",
        Alt((
            Seq((Terminal("filter"), Terminal("id"), RuleRef("instance_id"))),
            Seq((Terminal("includes"), Lexeme("WORD"))),
        )),
    )
    grammar.define("any_op", Alt((RuleRef("scoped_op"), RuleRef("unscoped_op"))))
    grammar.define("scoped_op", Alt(tuple(_op_sequence(op) for op in scoped)))
    grammar.define("unscoped_op", Alt(tuple(_op_sequence(op) for op in unscoped)))
    grammar.define("instance_id", Alt(tuple(Terminal(str(i)) for i in ids)))
    grammar.define(
        "method",
        Alt(tuple(Terminal(m) for m in _enum_of(catalog, AttributeKind.METHOD_NAME))),
    )
    grammar.define(
        "metric",
        Alt(tuple(Terminal(m) for m in _enum_of(catalog, AttributeKind.METRIC))),
    )
    grammar.define(
        "opname",
        Alt(tuple(_name_sequence(op) for op in catalog.operations())),
    )
    return FormalGrammar(text=grammar.to_text(), start_symbol="query")


def _enum_of(catalog: Catalog, kind: AttributeKind) -> tuple[str, ...]:
    for op in catalog.operations():
        for attr in op.attributes:
            if attr.kind == kind:
                return attr.enum_values() or ()
    return ()


def sample_queries(grammar: FormalGrammar, n: int, seed: int = 0) -> list[str]:
    """Draw ``n`` random derivations from a compiled grammar."""
    parsed = parse_ebnf(grammar.text, grammar.start_symbol)
    rng = random.Random(seed)
    return [parsed.sample(rng) for _ in range(n)]
