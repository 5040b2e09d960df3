"""Catalog contents and invariants."""

import json

import pytest

from chatprobe.catalog import Category, NotFound, catalog_default

STARRED = {"predict", "nlpattribute", "rationalize", "similarity", "cfe", "augment"}


def test_catalog_has_21_operations(catalog):
    assert catalog.count_operations() == 21


def test_catalog_spans_nine_categories(catalog):
    assert {op.category for op in catalog} == set(Category)


def test_logic_connectives_excluded_from_count(catalog):
    assert {op.name for op in catalog.connectives()} == {"and", "or"}
    assert all(op.category == Category.LOGIC for op in catalog.connectives())


def test_lookup_rationalize_category(catalog):
    assert catalog.lookup("rationalize").category == Category.EXPLAIN


def test_lookup_unknown_raises(catalog):
    with pytest.raises(NotFound):
        catalog.lookup("nonexistent")


def test_custom_input_flags_match_starred_set(catalog):
    assert set(catalog.custom_input_ops()) == STARRED


def test_names_unique(catalog):
    names = [op.name for op in catalog]
    assert len(names) == len(set(names))


def test_optional_attributes_carry_defaults(catalog):
    for op in catalog:
        for attr in op.attributes:
            if not attr.required:
                # None is a legal default (means "unset", rendered by omission)
                assert hasattr(attr, "default")


def test_method_enum_is_exactly_four_attribution_methods(catalog):
    schema = catalog.lookup("nlpattribute").schema_for("method")
    assert schema.enum_values() == ("input_x_gradient", "attention", "lime", "integrated_gradient")


def test_metric_enum_is_exactly_four_metrics(catalog):
    schema = catalog.lookup("score").schema_for("metric")
    assert schema.enum_values() == ("f1", "precision", "recall", "accuracy")


def test_mistake_listings_are_two_operations(catalog):
    assert catalog.lookup("mistakes show").category == Category.PREDICTION
    assert catalog.lookup("mistakes count").category == Category.PREDICTION


def test_json_export_for_ui(catalog):
    doc = json.loads(catalog.to_json())
    assert len(doc["operations"]) == 21
    assert doc["connectives"] == ["and", "or"]
    by_name = {entry["name"]: entry for entry in doc["operations"]}
    assert by_name["nlpattribute"]["accepts_custom_input"] is True
    assert by_name["score"]["attributes"][0]["values"] == ["f1", "precision", "recall", "accuracy"]
