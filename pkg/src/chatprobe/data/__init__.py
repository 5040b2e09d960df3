"""Datasets, custom inputs, prediction cache, data-level operations."""

from .ops import (
    PAGE_SIZE,
    apply_filters,
    countdata,
    keywords,
    label_distribution,
    render_instance,
    show,
    similar_topk,
)
from .stopwords import STOPWORDS
from .store import (
    CachedPrediction,
    CQA_LABEL_NAMES,
    Dataset,
    EmptyDataset,
    IdNotFound,
    Instance,
    PredictionCache,
    SchemaError,
    Source,
    Task,
    add_custom_input,
    load_dataset,
    replay_history,
)

__all__ = [
    "CQA_LABEL_NAMES",
    "CachedPrediction",
    "Dataset",
    "EmptyDataset",
    "IdNotFound",
    "Instance",
    "PAGE_SIZE",
    "PredictionCache",
    "STOPWORDS",
    "SchemaError",
    "Source",
    "Task",
    "add_custom_input",
    "apply_filters",
    "countdata",
    "keywords",
    "label_distribution",
    "load_dataset",
    "render_instance",
    "replay_history",
    "show",
    "similar_topk",
]
