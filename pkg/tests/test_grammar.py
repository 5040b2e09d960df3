"""Grammar compiler: soundness, exactness boundaries, dialect round-trip."""

import random

import pytest

from chatprobe.catalog import (
    EmptyContext,
    GrammarContext,
    catalog_default,
    compile_grammar,
    parse_ebnf,
    parse_query,
    render_query,
    sample_queries,
    validate,
)

CATALOG = catalog_default()


def test_empty_context_rejected():
    with pytest.raises(EmptyContext):
        compile_grammar(CATALOG, GrammarContext(dataset_size=0))


def _derives(grammar_text: str, start: str, sentence: str) -> bool:
    """Independent membership check: backtracking recognizer over the dialect."""
    from chatprobe.catalog.ebnf import Alt, Lexeme, Opt, Rep, RuleRef, Seq, Terminal

    grammar = parse_ebnf(grammar_text, start)
    tokens = sentence.split()
    memo: dict = {}

    def ends(node, i) -> frozenset:
        key = (node, i)
        if key in memo:
            return memo[key]
        memo[key] = frozenset()  # guard against accidental cycles
        if isinstance(node, Terminal):
            result = frozenset({i + 1}) if i < len(tokens) and tokens[i] == node.text else frozenset()
        elif isinstance(node, Lexeme):
            ok = False
            if i < len(tokens):
                tok = tokens[i]
                if node.name == "POSINT":
                    ok = tok.isdigit() and int(tok) > 0
                else:
                    ok = tok.isalpha() and tok not in ("and", "or")
            result = frozenset({i + 1}) if ok else frozenset()
        elif isinstance(node, RuleRef):
            result = ends(grammar.rules[node.name], i)
        elif isinstance(node, Seq):
            positions = {i}
            for item in node.items:
                positions = set().union(*(ends(item, p) for p in positions)) if positions else set()
            result = frozenset(positions)
        elif isinstance(node, Alt):
            result = frozenset().union(*(ends(option, i) for option in node.options))
        elif isinstance(node, Opt):
            result = frozenset({i}) | ends(node.item, i)
        elif isinstance(node, Rep):
            positions = {i}
            frontier = {i}
            while frontier:
                step = set().union(*(ends(node.item, p) for p in frontier)) - positions
                positions |= step
                frontier = step
            result = frozenset(positions)
        else:
            raise AssertionError(f"unknown node {node!r}")
        memo[key] = result
        return result

    return len(tokens) in ends(grammar.rules[start], 0)


def test_minimal_context_derives_filter_predict():
    grammar = compile_grammar(CATALOG, GrammarContext(dataset_size=1))
    assert '"filter" "id" instance_id' in grammar.text
    assert 'instance_id ::= "0" ;' in grammar.text
    ast = parse_query("filter id 0 and predict")
    assert validate(ast, CATALOG, 1).ok
    assert _derives(grammar.text, "query", "filter id 0 and predict")
    # strings invalid in this context are not derivable
    assert not _derives(grammar.text, "query", "filter id 1 and predict")  # id out of range
    assert not _derives(grammar.text, "query", "predict")  # bare starred op
    assert not _derives(grammar.text, "query", "filter id 0")  # pure filter
    assert not _derives(grammar.text, "query", "rationalize or augment")  # or misuse


def test_metric_alternation_lists_all_four():
    grammar = compile_grammar(CATALOG, GrammarContext(dataset_size=3))
    assert 'metric ::= "f1" | "precision" | "recall" | "accuracy" ;' in grammar.text


def test_custom_input_ids_enter_the_grammar():
    grammar = compile_grammar(
        CATALOG, GrammarContext(dataset_size=2, custom_input_ids=frozenset({7}))
    )
    assert '"7"' in grammar.text


def test_samples_all_validate():
    grammar = compile_grammar(CATALOG, GrammarContext(dataset_size=100))
    for query in sample_queries(grammar, 500, seed=1):
        ast = parse_query(query, CATALOG)
        report = validate(ast, CATALOG, 100)
        assert report.ok, (query, report.violations)


def test_roundtrip_identity_on_samples():
    grammar = compile_grammar(CATALOG, GrammarContext(dataset_size=100))
    for query in sample_queries(grammar, 500, seed=2):
        assert render_query(parse_query(query, CATALOG), CATALOG) == query


def test_starred_ops_not_derivable_bare_without_context():
    grammar = compile_grammar(CATALOG, GrammarContext(dataset_size=20))
    starred = set(CATALOG.custom_input_ops())
    for query in sample_queries(grammar, 400, seed=3):
        ast = parse_query(query, CATALOG)
        if not ast.filters:
            assert not starred & set(ast.op_names()), query


def test_instance_context_allows_bare_starred_ops():
    grammar = compile_grammar(
        CATALOG, GrammarContext(dataset_size=20, has_instance_context=True)
    )
    starred = set(CATALOG.custom_input_ops())
    seen_bare_starred = False
    for query in sample_queries(grammar, 400, seed=4):
        ast = parse_query(query, CATALOG)
        report = validate(ast, CATALOG, 20, has_instance_context=True)
        assert report.ok, (query, report.violations)
        if not ast.filters and starred & set(ast.op_names()):
            seen_bare_starred = True
    assert seen_bare_starred


def test_grammar_text_roundtrips_through_dialect_parser():
    grammar = compile_grammar(CATALOG, GrammarContext(dataset_size=10))
    reparsed = parse_ebnf(grammar.text, grammar.start_symbol)
    assert reparsed.to_text() == grammar.text
    # sampling from the reparsed grammar stays sound
    rng = random.Random(5)
    for _ in range(100):
        query = reparsed.sample(rng)
        assert validate(parse_query(query, CATALOG), CATALOG, 10).ok


def test_dialect_parser_on_handwritten_grammar():
    text = """
    (* a toy grammar *)
    start ::= "a" middle "z" ;
    middle ::= "b"? here* | WORD ;
    here ::= "c" | POSINT ;
    """
    grammar = parse_ebnf(text, "start")
    rng = random.Random(0)
    for _ in range(50):
        tokens = grammar.sample(rng).split()
        assert tokens[0] == "a" and tokens[-1] == "z"
