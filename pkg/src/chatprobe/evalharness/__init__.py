"""Evaluation harness: exact-match parsing accuracy, augmentation metrics."""

from .augment_eval import AugmentationReport, eval_augmentation
from .parsing_eval import (
    EvalReport,
    Failure,
    GoldPair,
    GoldsetSchemaError,
    InvalidGoldParse,
    MIN_OP_COVERAGE,
    SWEEP_MAX_NEW_TOKENS,
    UNPARSEABLE,
    build_goldset,
    eval_parsing,
    eval_parsing_sweep,
    goldset_coverage,
)
from .report import render_report, report_to_dict

__all__ = [
    "AugmentationReport",
    "EvalReport",
    "Failure",
    "GoldPair",
    "GoldsetSchemaError",
    "InvalidGoldParse",
    "MIN_OP_COVERAGE",
    "SWEEP_MAX_NEW_TOKENS",
    "UNPARSEABLE",
    "build_goldset",
    "eval_augmentation",
    "eval_parsing",
    "eval_parsing_sweep",
    "goldset_coverage",
    "render_report",
    "report_to_dict",
]
