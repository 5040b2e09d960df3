"""Render evaluation reports as text or JSON documents."""

from __future__ import annotations

import json
from typing import Any

from .augment_eval import AugmentationReport
from .parsing_eval import EvalReport


def report_to_dict(report: EvalReport | AugmentationReport) -> dict[str, Any]:
    if isinstance(report, EvalReport):
        return {
            "kind": "parsing",
            "strategy": report.strategy,
            "backend_id": report.backend_id,
            "max_new_tokens": report.max_new_tokens,
            "total": report.total,
            "matches": report.matches,
            "exact_match_accuracy_pct": report.accuracy_pct(),
            "confusion": report.confusion,
            "failures": [
                {"utterance": f.utterance, "gold": f.gold, "predicted": f.predicted}
                for f in report.failures
            ],
        }
    return {
        "kind": "augmentation",
        "n": report.n,
        "consistency": round(report.consistency, 4),
        "fluency": round(report.fluency, 4),
    }


def render_report(report: EvalReport | AugmentationReport, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(report_to_dict(report), indent=2, sort_keys=True)
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    if isinstance(report, EvalReport):
        lines = [
            f"strategy: {report.strategy}",
            f"backend: {report.backend_id}",
            f"max_new_tokens: {report.max_new_tokens}",
            f"exact match accuracy: {report.accuracy_pct()}% ({report.matches}/{report.total})",
        ]
        if report.failures:
            lines.append(f"failures ({len(report.failures)}):")
            for failure in report.failures:
                lines.append(f"  {failure.utterance!r}: gold {failure.gold!r} != {failure.predicted!r}")
        return "\n".join(lines)
    return (
        f"augmentation over {report.n} instance(s): "
        f"consistency {report.consistency:.2f}, fluency {report.fluency:.2f}"
    )
