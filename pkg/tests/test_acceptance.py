"""Acceptance criteria for the primary component.

Each test covers one criterion at its stated tolerance and prints one
pass/fail line (run with ``pytest -s tests/test_acceptance.py`` to see them).
"""

import hashlib
import json
import random
import re
import time
from contextlib import contextmanager

import numpy as np
import pytest
from fastapi.testclient import TestClient

from chatprobe.backends import BackendSuite, MockEmbeddingBackend, MockGenerationBackend
from chatprobe.catalog import (
    GrammarContext,
    catalog_default,
    compile_grammar,
    parse_query,
    render_query,
    sample_queries,
    validate,
)
from chatprobe.data import apply_filters, countdata, label_distribution, load_dataset
from chatprobe.dialogue import export_json, export_session
from chatprobe.evalharness import build_goldset, eval_parsing, goldset_coverage
from chatprobe.parsing import (
    DialogueSummary,
    ParseContext,
    ParsingEngine,
    PromptStore,
    Strategy,
)
from chatprobe.server.app import create_app

from conftest import RESOURCES, make_suite, make_workbench, mp_script

CATALOG = catalog_default()
STORE = PromptStore.load(RESOURCES / "prompts")


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name}")


def test_dsl_roundtrip_1000_samples_under_one_second():
    with criterion("DSL round-trip: 1000 grammar-sampled queries, render∘parse = identity, < 1 s"):
        grammar = compile_grammar(CATALOG, GrammarContext(dataset_size=100))
        queries = sample_queries(grammar, 1000, seed=11)
        started = time.perf_counter()
        for query in queries:
            ast = parse_query(query, CATALOG)
            assert render_query(ast, CATALOG) == query
            report = validate(ast, CATALOG, 100)
            assert report.ok, (query, report.violations)
        elapsed = time.perf_counter() - started
        assert elapsed < 1.0, f"round-trip of 1000 queries took {elapsed:.3f}s"


def test_grammar_soundness_500_samples():
    with criterion("Grammar soundness: 500 sampled strings all parse and validate"):
        grammar = compile_grammar(CATALOG, GrammarContext(dataset_size=100))
        failures = []
        for query in sample_queries(grammar, 500, seed=23):
            try:
                report = validate(parse_query(query, CATALOG), CATALOG, 100)
                if not report.ok:
                    failures.append((query, report.violations))
            except Exception as exc:  # noqa: BLE001 - counted as failure
                failures.append((query, exc))
        assert not failures, failures[:5]


def test_mp_worked_examples_exact_strings():
    with criterion("MP worked example: attribution and rationale requests parse exactly"):
        ctx = ParseContext(dataset_size=100)

        utterance = "What are the feature attributions for ID 42 based on the integrated gradients?"
        suite = make_suite(
            mp_script(utterance, "nlpattribute", "filter id 42 and nlpattribute integrated_gradient")
        )
        engine = ParsingEngine(CATALOG, suite)
        result = engine.parse_mp(utterance, STORE, ctx)
        assert result.render(CATALOG) == "filter id 42 and nlpattribute integrated_gradient"

        rationale = "please explain the reasoning behind id 26"
        suite = make_suite(mp_script(rationale, "rationalize", "filter id 26 and rationalize"))
        engine = ParsingEngine(CATALOG, suite)
        result = engine.parse_mp(rationale, STORE, ctx)
        assert result.render(CATALOG) == "filter id 26 and rationalize"


def test_hallucination_filter_blocks_fabricated_ids():
    with criterion("Hallucination filter: 100 adversarial parses leak no out-of-context ids"):
        rng = random.Random(41)
        ops = ["augment", "predict", "rationalize", "cfe", "similarity", "nlpattribute"]
        context_id = 2
        for case in range(100):
            op = rng.choice(ops)
            fake_id = rng.randrange(300, 900)
            mentions = rng.random() < 0.5
            real_id = rng.randrange(100)
            utterance = (
                f"run {op} on instance {real_id} variant {case}"
                if mentions
                else f"run {op} for me variant {case}"
            )
            adversarial = f"filter id {fake_id} and {op}"
            suite = make_suite(mp_script(utterance, op, adversarial))
            engine = ParsingEngine(CATALOG, suite)
            ctx = ParseContext(
                dataset_size=100, dialogue=DialogueSummary(last_instance_id=context_id)
            )
            result = engine.parse_mp(utterance, STORE, ctx)
            allowed = set(int(n) for n in re.findall(r"\d+", utterance)) | {context_id}
            for instance_id in result.ast.instance_ids():
                assert instance_id in allowed, (utterance, adversarial, result.render(CATALOG))


def _trigram_vector(text: str, dim: int = 512) -> np.ndarray:
    vec = np.zeros(dim)
    padded = f"  {text.lower()}  "
    for i in range(len(padded) - 2):
        digest = hashlib.md5(padded[i : i + 3].encode()).digest()
        vec[int.from_bytes(digest[:4], "big") % dim] += 1
    return vec


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(a @ b / (na * nb))


def test_harness_calibration():
    with criterion(
        "Harness calibration: oracle 100.00%, every-4th corrupted 75.00%, NN matches brute force"
    ):
        goldset = build_goldset(RESOURCES / "goldset.jsonl", CATALOG)

        oracle_script = [(f"{p.utterance}\nParse:", p.gold_parse) for p in goldset]
        engine = ParsingEngine(CATALOG, make_suite(oracle_script))
        report = eval_parsing(goldset, engine, STORE, Strategy.GD)
        assert report.accuracy_pct() == "100.00"

        subset = goldset[:120]
        corrupted = []
        for i, pair in enumerate(subset):
            completion = pair.gold_parse
            if (i + 1) % 4 == 0:
                completion = "data" if completion == "model" else "model"
            corrupted.append((f"{pair.utterance}\nParse:", completion))
        engine = ParsingEngine(CATALOG, make_suite(corrupted))
        report = eval_parsing(subset, engine, STORE, Strategy.GD)
        assert report.accuracy_pct() == "75.00"

        # nearest-neighbor against an independent brute-force similarity scan
        engine = ParsingEngine(CATALOG, make_suite([]))
        nn_report = eval_parsing(goldset, engine, STORE, Strategy.NEAREST_NEIGHBOR)
        pool_vectors = [_trigram_vector(d.utterance) for d in STORE.gd_pool]
        oracle_flags = []
        for pair in goldset:
            query_vec = _trigram_vector(pair.utterance)
            scores = [_cosine(query_vec, v) for v in pool_vectors]
            best = max(range(len(scores)), key=lambda i: (scores[i], -i))
            oracle_flags.append(STORE.gd_pool[best].parse == pair.gold_parse)
        assert nn_report.match_flags == oracle_flags
        assert nn_report.matches == sum(oracle_flags)


def test_shipped_goldset_contract():
    with criterion("Shipped goldset: >= 119 pairs, 21/21 operation coverage, all parses valid"):
        goldset = build_goldset(RESOURCES / "goldset.jsonl", CATALOG)
        assert len(goldset) >= 119
        coverage = goldset_coverage(goldset, CATALOG)
        assert len(coverage) == 21
        assert all(count >= 3 for count in coverage.values()), coverage


def test_executor_identities_on_fixtures():
    with criterion(
        "Executor identities: accuracy = 1 - mistakes/N, label sums, scope compositionality"
    ):
        from chatprobe.catalog import Connective, FilterNode
        from chatprobe.data import PredictionCache
        from chatprobe.executor import Executor, RunContext, TemplateLibrary, load_task_prompts

        ds = load_dataset(RESOURCES / "datasets" / "covid_fact_mini.jsonl")
        suite = make_suite([("Claim:", "SUPPORT")])
        executor = Executor(
            CATALOG, suite, TemplateLibrary(RESOURCES / "templates"),
            load_task_prompts(RESOURCES / "prompts" / "tasks"),
        )
        rc = RunContext(dataset=ds, cache=PredictionCache(), rng=random.Random(1))

        # accuracy = 1 - mistakes/N over every contiguous and token-scoped subset
        subsets = [list(ds.instances)]
        subsets += [list(ds.instances)[i:j] for i in range(0, 8, 3) for j in range(i + 1, 9, 3)]
        for token in ("covid", "vaccine", "masks"):
            subsets.append(apply_filters(ds, [FilterNode.includes(token)]))
        for subset in subsets:
            if not subset:
                continue
            mistakes = executor.exec_mistakes(subset, "count", rc).payloads[0]["count"]
            accuracy = executor.exec_score(subset, "accuracy", rc).payloads[0]["value"]
            assert accuracy == pytest.approx(1 - mistakes / len(subset))

        # label counts sum to countdata
        distribution = label_distribution(ds)
        assert sum(distribution.values()) == countdata(list(ds.instances))

        # filter-then-op equals op-over-filtered-scope on 50 random composed queries
        rng = random.Random(17)
        tokens = ["covid", "vaccine", "masks", "virus", "warm", "hygiene"]
        checked = 0
        while checked < 50:
            if rng.random() < 0.5:
                instance_id = rng.randrange(8)
                filter_text, node = f"filter id {instance_id}", FilterNode.by_id(instance_id)
            else:
                token = rng.choice(tokens)
                filter_text, node = f"includes {token}", FilterNode.includes(token)
            op = rng.choice(["countdata", "show", "mistakes count", "score accuracy", "label"])
            scope = apply_filters(ds, [node], Connective.AND)
            combined = executor.exec_query(parse_query(f"{filter_text} and {op}"), rc)
            if op == "countdata":
                assert combined.payloads[0]["count"] == len(scope)
            elif op == "show":
                assert combined.payloads[0]["count"] == len(scope)
                assert [i["id"] for i in combined.payloads[0]["items"]] == [i.id for i in scope[:10]]
            elif op == "mistakes count":
                direct = executor.exec_mistakes(scope, "count", rc).payloads[0]["count"]
                assert combined.payloads[0]["count"] == direct
            elif op == "label":
                direct = label_distribution(ds, scope)
                assert combined.payloads[0]["counts"] == direct
            else:
                if not scope:
                    continue
                direct = executor.exec_score(scope, "accuracy", rc).payloads[0]["value"]
                assert combined.payloads[0]["value"] == direct
            checked += 1


def test_augmentation_metric_calibration():
    with criterion("Augmentation calibration: identity 1.0/1.0±1e-6, half-flip 0.50 exactly"):
        from chatprobe.data import PredictionCache
        from chatprobe.evalharness import eval_augmentation
        from chatprobe.executor import Executor, TemplateLibrary, load_task_prompts

        ds = load_dataset(RESOURCES / "datasets" / "covid_fact_mini.jsonl")

        identity_script = [("Claim:", "SUPPORT")]
        for inst in ds.instances:
            identity_script.append((f"Text: {inst.fields['claim']}\n", inst.fields["claim"]))
        suite = make_suite(identity_script)
        executor = Executor(
            CATALOG, suite, TemplateLibrary(RESOURCES / "templates"),
            load_task_prompts(RESOURCES / "prompts" / "tasks"),
        )
        report = eval_augmentation(ds, executor, suite, n=8)
        assert report.consistency == 1.0
        assert report.fluency == pytest.approx(1.0, abs=1e-6)

        flip_script = []
        for inst in ds.instances:
            rewrite = f"rewritten claim number {inst.id}"
            flip_script.append((f"Text: {inst.fields['claim']}\n", rewrite))
            flip_script.append(
                (f"Claim: {rewrite}", "SUPPORT" if inst.id % 2 == 0 else "REFUTE")
            )
        flip_script.append(("Claim:", "SUPPORT"))
        suite = make_suite(flip_script)
        executor = Executor(
            CATALOG, suite, TemplateLibrary(RESOURCES / "templates"),
            load_task_prompts(RESOURCES / "prompts" / "tasks"),
        )
        report = eval_augmentation(ds, executor, suite, n=8)
        assert report.consistency == 0.5


def test_suggestion_dedup_fuzz_and_replay():
    with criterion(
        "Suggestion dedup fuzz: 200 turns, no repeats; export→replay byte-identical"
    ):
        ds = load_dataset(RESOURCES / "datasets" / "ecqa_mini.jsonl")
        ask = "Can you explain the reasoning behind the prediction for instance 26?"
        script = [
            *mp_script(ask, "rationalize", "filter id 26 and rationalize"),
            *mp_script("how are the labels distributed?", "label", "label"),
            *mp_script("how many examples do you have?", "countdata", "countdata"),
            ("Question:", "negotiating"),
            ("Rationale:", "They are negotiating until agreement."),
            ("Rewrite:", "Rephrased wording of the question."),
            ("Edit:", "A flipped version of the question."),
            ("Explanation:", "A tutorial answer."),
        ]
        wb = make_workbench(ds, script)
        session = wb.new_session(seed=77)
        rng = random.Random(5)
        inputs = [
            "yes please", "no thanks", "sure", "ok", "not now",
            ask, "how are the labels distributed?", "how many examples do you have?",
            "zzz gibberish qqq",
        ]
        wb.handle_turn(session, ask)
        for _ in range(199):
            wb.handle_turn(session, rng.choice(inputs))
        assert len(session.turns) == 200

        suggested = [t.suggestion.op for t in session.turns if t.suggestion is not None]
        assert len(suggested) == len(set(suggested)), "a suggestion repeated"
        executed_before: set = set()
        for turn in session.turns:
            if turn.suggestion is not None:
                assert turn.suggestion.op not in executed_before, "suggested an executed op"
            if turn.execution is not None and turn.parse_text:
                executed_before.update(parse_query(turn.parse_text).op_names())

        document = export_session(session)
        replayed = wb.replay(document, session_id=session.id)
        assert export_json(replayed) == export_json(session)


def test_full_api_smoke_under_five_seconds():
    with criterion("API smoke: session + 3 turns + settings + export on mocks, < 5 s"):
        started = time.perf_counter()
        ds = load_dataset(RESOURCES / "datasets" / "ecqa_mini.jsonl")
        ask = "Can you explain the reasoning behind the prediction for instance 26?"
        script = [
            *mp_script(ask, "rationalize", "filter id 26 and rationalize"),
            *mp_script("how are the labels distributed?", "label", "label"),
            *mp_script("teach me about augmentation please", "qatutorial", "qatutorial augment"),
            ("Question:", "negotiating"),
            ("Rationale:", "They are negotiating towards agreement."),
            ("Explanation:", "Augmentation rewrites an input while keeping its meaning."),
        ]
        suite = BackendSuite(
            generation=MockGenerationBackend(script), embedding=MockEmbeddingBackend()
        )  # no optional attribution backend configured
        wb = make_workbench(ds, [])
        wb.backends = suite
        wb.engine.backends = suite
        wb.executor.backends = suite
        client = TestClient(create_app(wb))

        sid = client.post("/api/sessions", json={"seed": 9}).json()["session_id"]
        first = client.post(f"/api/sessions/{sid}/turns", json={"text": ask}).json()
        assert first["parse"] == "filter id 26 and rationalize"
        second = client.post(
            f"/api/sessions/{sid}/turns", json={"text": "how are the labels distributed?"}
        ).json()
        assert second["parse"] == "label"
        put = client.put(f"/api/sessions/{sid}/settings", json={"expertise": "expert"})
        assert put.status_code == 200
        third = client.post(
            f"/api/sessions/{sid}/turns", json={"text": "teach me about augmentation please"}
        ).json()
        assert third["parse"] == "qatutorial augment"
        export = client.get(f"/api/sessions/{sid}/export").json()
        assert len(export["turns"]) == 3
        assert export["settings"]["expertise"] == "expert"
        elapsed = time.perf_counter() - started
        assert elapsed < 5.0, f"smoke flow took {elapsed:.2f}s"
