"""Augmentation quality: label consistency and semantic fluency.

Consistency is the fraction of instances whose predicted label is unchanged
by augmentation (predicted-vs-predicted, so no gold labels are needed).
Fluency is the mean embedding similarity between the original and augmented
text, with the lexical fallback when no embedding backend is configured.
Both metrics are computed over the same instance sample.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..backends.protocol import BackendSuite
from ..backends.similarity import similarity
from ..data.store import Dataset, Instance, PredictionCache
from ..executor.run import Executor, RunContext


@dataclass
class AugmentationReport:
    consistency: float
    fluency: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("augmentation report needs n >= 1")
        if not (0.0 <= self.consistency <= 1.0 and 0.0 <= self.fluency <= 1.0):
            raise ValueError("consistency and fluency must lie in [0, 1]")


def eval_augmentation(
    dataset: Dataset,
    executor: Executor,
    backends: BackendSuite,
    n: int,
    seed: int = 0,
) -> AugmentationReport:
    if not 1 <= n <= len(dataset.instances):
        raise ValueError(f"n must be between 1 and {len(dataset.instances)}, got {n}")
    rc = RunContext(dataset=dataset, cache=PredictionCache(), rng=random.Random(seed))
    sample = dataset.instances[:n]

    consistent = 0
    fluency_sum = 0.0
    field = dataset.primary_field
    for instance in sample:
        provenance = []
        original_prediction, _ = executor.predict_instance(instance, rc, provenance)

        augment_result = executor.exec_augment(instance, rc)
        augmented_text = augment_result.payloads[0]["text"]

        augmented_fields = dict(instance.fields)
        augmented_fields[field] = augmented_text
        augmented_instance = Instance(
            id=instance.id, fields=augmented_fields, gold_label=None, source=instance.source
        )
        prompt = executor._predict_text_prompt(dataset, augmented_instance, rc)
        raw = executor._generate(prompt, provenance, max_new_tokens=24)
        augmented_label, _ = executor._map_label(
            raw, executor._label_candidates(dataset, augmented_instance)
        )

        if augmented_label == original_prediction.label:
            consistent += 1
        score = similarity(instance.fields[field], augmented_text, backends.embedding)
        fluency_sum += min(1.0, max(0.0, score))

    return AugmentationReport(
        consistency=consistent / len(sample),
        fluency=fluency_sum / len(sample),
        n=len(sample),
    )
