"""Minimal EBNF dialect used for constrained-decoding grammars.

The dialect, in full:

    rule ::= alternative | alternative ;      -- one rule per ``name ::= ... ;``
    sequence: terms separated by whitespace, joined by single spaces
    term: "literal"  |  rule_name  |  LEXEME  |  ( group )  |  term?  |  term*
    comments: (* ... *)

Uppercase names are built-in character-class lexemes rather than rules:

    POSINT  -- a positive decimal integer
    WORD    -- a lowercase word, excluding the reserved connectives and/or

Terminals in a derivation are joined by single spaces. Grammars round-trip
through text so a generation backend can be handed the text verbatim.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field


class EbnfError(Exception):
    pass


LEXEMES = ("POSINT", "WORD")
_WORD_RESERVED = {"and", "or"}
_LETTERS = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class Terminal:
    text: str


@dataclass(frozen=True)
class Lexeme:
    name: str  # POSINT | WORD


@dataclass(frozen=True)
class RuleRef:
    name: str


@dataclass(frozen=True)
class Seq:
    items: tuple


@dataclass(frozen=True)
class Alt:
    options: tuple


@dataclass(frozen=True)
class Opt:
    item: object


@dataclass(frozen=True)
class Rep:
    item: object


@dataclass
class Grammar:
    start: str
    rules: dict[str, object] = field(default_factory=dict)

    def define(self, name: str, node: object) -> None:
        self.rules[name] = node

    # -- serialization ------------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for name, node in self.rules.items():
            lines.append(f"{name} ::= {_node_text(node, top=True)} ;")
        return "\n".join(lines) + "\n"

    # -- sampling -----------------------------------------------------------

    def sample(self, rng: random.Random, max_rep: int = 2) -> str:
        tokens = self._sample_node(self.rules[self.start], rng, max_rep, depth=0)
        return " ".join(tokens)

    def _sample_node(self, node: object, rng: random.Random, max_rep: int, depth: int) -> list[str]:
        if depth > 64:
            raise EbnfError("sampling recursion limit exceeded; grammar not loop-free")
        if isinstance(node, Terminal):
            return [node.text]
        if isinstance(node, Lexeme):
            return [_sample_lexeme(node.name, rng)]
        if isinstance(node, RuleRef):
            try:
                target = self.rules[node.name]
            except KeyError:
                raise EbnfError(f"undefined rule {node.name!r}") from None
            return self._sample_node(target, rng, max_rep, depth + 1)
        if isinstance(node, Seq):
            out: list[str] = []
            for item in node.items:
                out.extend(self._sample_node(item, rng, max_rep, depth + 1))
            return out
        if isinstance(node, Alt):
            choice = rng.choice(node.options)
            return self._sample_node(choice, rng, max_rep, depth + 1)
        if isinstance(node, Opt):
            if rng.random() < 0.5:
                return self._sample_node(node.item, rng, max_rep, depth + 1)
            return []
        if isinstance(node, Rep):
            out = []
            for _ in range(rng.randint(0, max_rep)):
                out.extend(self._sample_node(node.item, rng, max_rep, depth + 1))
            return out
        raise EbnfError(f"unknown grammar node {node!r}")


def _sample_lexeme(name: str, rng: random.Random) -> str:
    if name == "POSINT":
        return str(rng.randint(1, 30))
    if name == "WORD":
        while True:
            word = "".join(rng.choice(_LETTERS) for _ in range(rng.randint(3, 8)))
            if word not in _WORD_RESERVED:
                return word
    raise EbnfError(f"unknown lexeme {name!r}")


def _needs_group(node: object) -> bool:
    return isinstance(node, (Alt, Seq))


def _node_text(node: object, top: bool = False) -> str:
    if isinstance(node, Terminal):
        return f'"{node.text}"'
    if isinstance(node, Lexeme):
        return node.name
    if isinstance(node, RuleRef):
        return node.name
    if isinstance(node, Seq):
        inner = " ".join(
            f"( {_node_text(i)} )" if isinstance(i, Alt) else _node_text(i) for i in node.items
        )
        return inner
    if isinstance(node, Alt):
        inner = " | ".join(_node_text(o) for o in node.options)
        return inner if top else f"( {inner} )"
    if isinstance(node, Opt):
        body = _node_text(node.item)
        if _needs_group(node.item):
            body = f"( {body} )"
        return f"{body}?"
    if isinstance(node, Rep):
        body = _node_text(node.item)
        if _needs_group(node.item):
            body = f"( {body} )"
        return f"{body}*"
    raise EbnfError(f"unknown grammar node {node!r}")


# -- text -> Grammar ---------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    \(\*.*?\*\)           # comment
  | "(?P<lit>[^"]*)"      # literal
  | (?P<def>::=)
  | (?P<sym>[|;()?*])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<num>[0-9]+)
    """,
    re.VERBOSE | re.DOTALL,
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens: list[tuple[str, str]] = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise EbnfError(f"cannot tokenize grammar text at offset {pos}")
        pos = m.end()
        if m.group("lit") is not None:
            tokens.append(("lit", m.group("lit")))
        elif m.group("def"):
            tokens.append(("::=", "::="))
        elif m.group("sym"):
            tokens.append((m.group("sym"), m.group("sym")))
        elif m.group("ident"):
            tokens.append(("ident", m.group("ident")))
        elif m.group("num"):
            # bare numbers inside rules are treated as literal terminals
            tokens.append(("lit", m.group("num")))
    return tokens


class _EbnfParser:
    def __init__(self, tokens: list[tuple[str, str]]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> tuple[str, str] | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> tuple[str, str]:
        tok = self.peek()
        if tok is None:
            raise EbnfError("unexpected end of grammar text")
        self.pos += 1
        return tok

    def parse_rules(self) -> dict[str, object]:
        rules: dict[str, object] = {}
        while self.peek() is not None:
            kind, value = self.next()
            if kind != "ident":
                raise EbnfError(f"expected rule name, got {value!r}")
            k2, _ = self.next()
            if k2 != "::=":
                raise EbnfError(f"expected '::=' after rule name {value!r}")
            node = self.parse_alt()
            k3, v3 = self.next()
            if k3 != ";":
                raise EbnfError(f"expected ';' to end rule {value!r}, got {v3!r}")
            rules[value] = node
        return rules

    def parse_alt(self) -> object:
        options = [self.parse_seq()]
        while self.peek() == ("|", "|"):
            self.next()
            options.append(self.parse_seq())
        return options[0] if len(options) == 1 else Alt(tuple(options))

    def parse_seq(self) -> object:
        items = []
        while True:
            tok = self.peek()
            if tok is None or tok[0] in (";", "|", ")"):
                break
            items.append(self.parse_term())
        if not items:
            raise EbnfError("empty sequence in grammar")
        return items[0] if len(items) == 1 else Seq(tuple(items))

    def parse_term(self) -> object:
        kind, value = self.next()
        if kind == "lit":
            node: object = Terminal(value)
        elif kind == "ident":
            node = Lexeme(value) if value in LEXEMES else RuleRef(value)
        elif kind == "(":
            node = self.parse_alt()
            closing = self.next()
            if closing[0] != ")":
                raise EbnfError("unbalanced parenthesis in grammar")
        else:
            raise EbnfError(f"unexpected token {value!r} in grammar")
        while self.peek() in (("?", "?"), ("*", "*")):
            mark, _ = self.next()
            node = Opt(node) if mark == "?" else Rep(node)
        return node


def parse_ebnf(text: str, start: str | None = None) -> Grammar:
    """Read grammar text in the in-repo dialect back into a Grammar object."""
    rules = _EbnfParser(_tokenize(text)).parse_rules()
    if not rules:
        raise EbnfError("grammar text defines no rules")
    start_symbol = start or next(iter(rules))
    if start_symbol not in rules:
        raise EbnfError(f"start symbol {start_symbol!r} is not defined")
    return Grammar(start=start_symbol, rules=rules)
