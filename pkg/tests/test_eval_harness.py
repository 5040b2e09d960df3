"""Evaluation harness: goldset handling, calibration mocks, augmentation metrics."""

import json
import random

import pytest

from chatprobe.backends import (
    BackendSuite,
    MockEmbeddingBackend,
    MockGenerationBackend,
)
from chatprobe.catalog import catalog_default
from chatprobe.evalharness import (
    AugmentationReport,
    GoldsetSchemaError,
    InvalidGoldParse,
    build_goldset,
    eval_augmentation,
    eval_parsing,
    eval_parsing_sweep,
    goldset_coverage,
    render_report,
    report_to_dict,
)
from chatprobe.executor import Executor, TemplateLibrary, load_task_prompts
from chatprobe.parsing import ParsingEngine, Strategy

from conftest import RESOURCES

CATALOG = catalog_default()
GOLDSET_PATH = RESOURCES / "goldset.jsonl"


from chatprobe.parsing import PromptStore

STORE = PromptStore.load(RESOURCES / "prompts")


def gd_oracle_engine(goldset, corrupt_every=None):
    """GD-scripted mock that answers each utterance with its gold parse,
    optionally corrupting every k-th pair (1-indexed positions k, 2k, ...)."""
    script = []
    for i, pair in enumerate(goldset):
        completion = pair.gold_parse
        if corrupt_every and (i + 1) % corrupt_every == 0:
            # a valid parse guaranteed to differ from the gold one
            completion = "data" if pair.gold_parse == "model" else "model"
        script.append((f"{pair.utterance}\nParse:", completion))
    suite = BackendSuite(generation=MockGenerationBackend(script), embedding=MockEmbeddingBackend())
    return ParsingEngine(CATALOG, suite)


class TestGoldset:
    def test_shipped_goldset_size(self):
        assert len(build_goldset(GOLDSET_PATH, CATALOG)) >= 119

    def test_shipped_goldset_covers_all_operations(self):
        pairs = build_goldset(GOLDSET_PATH, CATALOG)
        coverage = goldset_coverage(pairs, CATALOG)
        assert len(coverage) == 21
        assert all(count >= 3 for count in coverage.values()), coverage

    def test_invalid_gold_parse_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps({"utterance": "x", "parse": "frobnicate 3"}))
        with pytest.raises(InvalidGoldParse):
            build_goldset(path, CATALOG)

    def test_non_canonical_gold_is_canonicalized(self, tmp_path):
        # matching is symmetric under whitespace/case: gold stated loosely
        # still compares against the canonical form
        path = tmp_path / "loose.jsonl"
        path.write_text(json.dumps({"utterance": "x", "parse": "Filter ID 3 and  SHOW"}))
        (pair,) = build_goldset(path, CATALOG)
        assert pair.gold_parse == "filter id 3 and show"

    def test_schema_error_on_missing_keys(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps({"utterance": "x"}))
        with pytest.raises(GoldsetSchemaError):
            build_goldset(path, CATALOG)

    def test_thin_coverage_warns(self, tmp_path, caplog):
        path = tmp_path / "thin.jsonl"
        path.write_text(json.dumps({"utterance": "x", "parse": "model"}))
        import logging

        with caplog.at_level(logging.WARNING):
            build_goldset(path, CATALOG)
        assert any("coverage" in record.message for record in caplog.records)


class TestParsingCalibration:
    def test_oracle_mock_scores_100(self):
        goldset = build_goldset(GOLDSET_PATH, CATALOG)
        engine = gd_oracle_engine(goldset)
        report = eval_parsing(goldset, engine, STORE, Strategy.GD)
        assert report.accuracy_pct() == "100.00"
        assert not report.failures

    def test_every_4th_corrupted_is_exactly_75(self):
        goldset = build_goldset(GOLDSET_PATH, CATALOG)[:120]
        assert len(goldset) == 120
        engine = gd_oracle_engine(goldset, corrupt_every=4)
        report = eval_parsing(goldset, engine, STORE, Strategy.GD)
        assert report.accuracy_pct() == "75.00"
        assert len(report.failures) == 30

    def test_unparseable_counts_as_mismatch(self):
        goldset = build_goldset(GOLDSET_PATH, CATALOG)[:10]
        suite = BackendSuite(generation=MockGenerationBackend())  # sentinel everywhere
        engine = ParsingEngine(CATALOG, suite)
        report = eval_parsing(goldset, engine, STORE, Strategy.GD)
        assert report.matches == 0
        assert all(f.predicted == "<unparseable>" for f in report.failures)

    def test_confusion_breakdown_tracks_primary_op(self):
        goldset = build_goldset(GOLDSET_PATH, CATALOG)[:8]
        engine = gd_oracle_engine(goldset, corrupt_every=2)
        report = eval_parsing(goldset, engine, STORE, Strategy.GD)
        predicted_as_model = sum(row.get("model", 0) for row in report.confusion.values())
        assert predicted_as_model == 4

    def test_sweep_covers_10_and_20(self, prompt_store):
        goldset = build_goldset(GOLDSET_PATH, CATALOG)[:6]
        engine = gd_oracle_engine(goldset)
        reports = eval_parsing_sweep(goldset, engine, prompt_store, Strategy.GD)
        assert [r.max_new_tokens for r in reports] == [10, 20]

    def test_budget_truncation_changes_outcome(self, prompt_store):
        # a 13-token gold parse only survives the 20-token budget
        from chatprobe.evalharness import GoldPair

        long_pair = GoldPair(
            utterance="compare instances 1, 2 and 3 for me",
            gold_parse="filter id 1 or filter id 2 or filter id 3 and show",
        )
        engine = gd_oracle_engine([long_pair])
        low, high = eval_parsing_sweep([long_pair], engine, prompt_store, Strategy.GD)
        assert (low.matches, high.matches) == (0, 1)

    def test_nn_strategy_on_disjoint_goldset(self, prompt_store):
        goldset = build_goldset(GOLDSET_PATH, CATALOG)
        suite = BackendSuite(generation=MockGenerationBackend(), embedding=MockEmbeddingBackend())
        engine = ParsingEngine(CATALOG, suite)
        report = eval_parsing(goldset, engine, prompt_store, Strategy.NEAREST_NEIGHBOR)
        assert 0.0 <= report.exact_match_accuracy <= 1.0
        assert len(report.failures) == report.total - report.matches

    def test_harness_determinism(self, prompt_store):
        goldset = build_goldset(GOLDSET_PATH, CATALOG)[:30]
        a = eval_parsing(goldset, gd_oracle_engine(goldset, 3), STORE, Strategy.GD)
        b = eval_parsing(goldset, gd_oracle_engine(goldset, 3), STORE, Strategy.GD)
        assert render_report(a, "json") == render_report(b, "json")


def _augment_executor(script):
    suite = BackendSuite(
        generation=MockGenerationBackend(script), embedding=MockEmbeddingBackend()
    )
    executor = Executor(
        CATALOG,
        suite,
        TemplateLibrary(RESOURCES / "templates"),
        load_task_prompts(RESOURCES / "prompts" / "tasks"),
    )
    return executor, suite


class TestAugmentationMetrics:
    def test_identity_mock_is_perfectly_consistent_and_fluent(self, covid_ds):
        script = [("Claim:", "SUPPORT")]
        for inst in covid_ds.instances:
            script.append((f"Text: {inst.fields['claim']}\n", inst.fields["claim"]))
        executor, suite = _augment_executor(script)
        report = eval_augmentation(covid_ds, executor, suite, n=8)
        assert report.consistency == 1.0
        assert report.fluency == pytest.approx(1.0, abs=1e-6)

    def test_half_flip_mock_is_half_consistent(self, covid_ds):
        # augmented texts of even ids keep the predicted label, odd ids flip it
        script = []
        for inst in covid_ds.instances:
            rewrite = f"rewrite {inst.id} of the claim"
            script.append((f"Text: {inst.fields['claim']}\n", rewrite))
            label = "SUPPORT" if inst.id % 2 == 0 else "REFUTE"
            script.append((f"Claim: {rewrite}", label))
        script.append(("Claim:", "SUPPORT"))  # originals all predict SUPPORT
        executor, suite = _augment_executor(script)
        report = eval_augmentation(covid_ds, executor, suite, n=8)
        assert report.consistency == 0.5

    def test_fluency_stays_in_range(self, covid_ds):
        rng = random.Random(0)
        words = ["virus", "spread", "масks", "unrelated", "totally", "different", "words"]
        script = [("Claim:", "SUPPORT")]
        for inst in covid_ds.instances:
            script.append(
                (f"Text: {inst.fields['claim']}\n", " ".join(rng.choices(words, k=6)))
            )
        executor, suite = _augment_executor(script)
        for n in (1, 4, 8):
            report = eval_augmentation(covid_ds, executor, suite, n=n)
            assert 0.0 <= report.fluency <= 1.0
            assert 0.0 <= report.consistency <= 1.0

    def test_n_out_of_range(self, covid_ds):
        executor, suite = _augment_executor([])
        with pytest.raises(ValueError):
            eval_augmentation(covid_ds, executor, suite, n=0)
        with pytest.raises(ValueError):
            eval_augmentation(covid_ds, executor, suite, n=99)

    def test_report_validation(self):
        with pytest.raises(ValueError):
            AugmentationReport(consistency=1.2, fluency=0.5, n=3)
        with pytest.raises(ValueError):
            AugmentationReport(consistency=0.5, fluency=0.5, n=0)


class TestReportRendering:
    def test_text_report_has_two_decimal_percent(self):
        goldset = build_goldset(GOLDSET_PATH, CATALOG)[:8]
        report = eval_parsing(goldset, gd_oracle_engine(goldset, 2), STORE, Strategy.GD)
        text = render_report(report, "text")
        assert "50.00%" in text

    def test_json_report_schema(self):
        goldset = build_goldset(GOLDSET_PATH, CATALOG)[:4]
        report = eval_parsing(goldset, gd_oracle_engine(goldset), STORE, Strategy.GD)
        doc = json.loads(render_report(report, "json"))
        assert doc["kind"] == "parsing"
        assert doc["exact_match_accuracy_pct"] == "100.00"

    def test_augmentation_report_rendering(self):
        report = AugmentationReport(consistency=0.5, fluency=0.75, n=4)
        assert "0.50" in render_report(report, "text")
        assert report_to_dict(report)["fluency"] == 0.75

    def test_unknown_format_rejected(self):
        report = AugmentationReport(consistency=1.0, fluency=1.0, n=1)
        with pytest.raises(ValueError):
            render_report(report, "yaml")
