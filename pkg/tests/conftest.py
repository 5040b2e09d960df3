"""Shared fixtures: catalog, datasets, prompt store, scripted backends."""

from __future__ import annotations

from pathlib import Path

import pytest

import chatprobe
from chatprobe.backends import (
    BackendSuite,
    MockAttributionBackend,
    MockEmbeddingBackend,
    MockGenerationBackend,
)
from chatprobe.catalog import catalog_default
from chatprobe.data import load_dataset
from chatprobe.parsing import PromptStore
from chatprobe.workbench import Workbench

RESOURCES = Path(chatprobe.__file__).parent / "resources"


@pytest.fixture(scope="session")
def catalog():
    return catalog_default()


@pytest.fixture(scope="session")
def prompt_store():
    return PromptStore.load(RESOURCES / "prompts")


@pytest.fixture
def covid_ds():
    return load_dataset(RESOURCES / "datasets" / "covid_fact_mini.jsonl")


@pytest.fixture
def ecqa_ds():
    return load_dataset(RESOURCES / "datasets" / "ecqa_mini.jsonl")


def mp_script(utterance: str, op: str, parse: str) -> list[tuple[str, str]]:
    """Mock table entries driving both multi-prompt stages for one utterance."""
    return [
        (f"{utterance}\nOperation:", op),
        (f"{utterance}\nParse:", parse),
    ]


def make_suite(script=(), embedding=True, attribution=True, **kwargs):
    generation = MockGenerationBackend(script, **kwargs)
    return BackendSuite(
        generation=generation,
        embedding=MockEmbeddingBackend() if embedding else None,
        attribution=MockAttributionBackend() if attribution else None,
    )


def make_workbench(dataset, script=(), *, metadata=None, seed=0, **kwargs) -> Workbench:
    suite = make_suite(script)
    meta = {
        "self_description": "I am a conversational workbench for model behavior.",
        "model_card": "A deterministic scripted mock.",
        "function_description": "",
        "dataset_description": "",
    }
    if metadata:
        meta.update(metadata)
    return Workbench(dataset, suite, metadata=meta, seed=seed, **kwargs)
