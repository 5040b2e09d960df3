"""Execute validated queries: predictions, scores, explanations, perturbations.

The executor is stateless; all mutation lives in the per-session
:class:`RunContext` (prediction cache, RNG, settings). Every operation ends
in a templated natural-language response plus a JSON-ready payload for rich
clients.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from pathlib import Path

from ..backends.protocol import (
    AttributionUnavailable,
    BackendSuite,
    GenerationRequest,
)
from ..catalog.ast import Connective, OpNode, QueryAst, UnknownOperation
from ..catalog.ops import Catalog
from ..data.ops import apply_filters, keywords, label_distribution, render_instance, show, similar_topk
from ..data.store import CachedPrediction, Dataset, Instance, PredictionCache, Task
from .templates import TemplateLibrary

PAGE_LIMIT = 10
PREDICT_MAX_NEW_TOKENS = 24
FREE_TEXT_MAX_NEW_TOKENS = 160


class ExecutorError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


class RangeError(ExecutorError):
    def __init__(self, message: str):
        super().__init__("range_error", message)


class EmptySubset(ExecutorError):
    def __init__(self, message: str = "no labeled instances in scope"):
        super().__init__("empty_subset", message)


@dataclass(frozen=True)
class CotStrategy:
    """A reasoning-eliciting prompt wrapper; the template wraps {instance}."""

    name: str
    template: str

    def __post_init__(self) -> None:
        if "{instance}" not in self.template:
            raise ValueError("CoT strategy template must contain {instance}")


COT_STRATEGIES: dict[str, CotStrategy] = {
    "zero_cot": CotStrategy("zero_cot", "{instance}\n\nLet's think step by step."),
    "plan_and_solve": CotStrategy(
        "plan_and_solve",
        "{instance}\n\nLet's first understand the problem and devise a plan to solve it. "
        "Then, let's carry out the plan and solve the problem step by step.",
    ),
    "opro": CotStrategy(
        "opro", "{instance}\n\nTake a deep breath and work through this problem step-by-step."
    ),
}


@dataclass(frozen=True)
class ExpertiseLevel:
    name: str
    role_preamble: str


EXPERTISE_LEVELS: dict[str, ExpertiseLevel] = {
    "beginner": ExpertiseLevel(
        "beginner",
        "You are talking to a beginner in NLP and explainability. Use plain language, "
        "avoid jargon, and explain with everyday examples.",
    ),
    "intermediate": ExpertiseLevel(
        "intermediate",
        "You are talking to a user with some NLP background. Keep explanations concise "
        "and technically accurate.",
    ),
    "expert": ExpertiseLevel(
        "expert",
        "You are talking to an NLP expert. Be precise and technical, referencing methods by name.",
    ),
}


@dataclass
class BackendCall:
    kind: str
    prompt: str
    response: str


@dataclass
class ExecutionResult:
    op: str
    payloads: list[dict]
    response_text: str
    provenance: list[BackendCall] = field(default_factory=list)


@dataclass
class RunContext:
    """Session-owned execution state handed to the stateless executor."""

    dataset: Dataset
    cache: PredictionCache
    rng: random.Random
    expertise: ExpertiseLevel = EXPERTISE_LEVELS["intermediate"]
    cot: CotStrategy = COT_STRATEGIES["zero_cot"]
    prompt_overrides: dict[str, str] = field(default_factory=dict)
    active_scope: list[Instance] = field(default_factory=list)


class _SafeDict(dict):
    def __missing__(self, key: str) -> str:
        return ""


def _instance_block(ds: Dataset, instance: Instance) -> str:
    if ds.task == Task.FACT_CHECKING:
        return f"Claim: {instance.fields['claim']}\nEvidence: {instance.fields['evidence']}"
    options = " / ".join(instance.choices())
    return f"Question: {instance.fields['question']}\nOptions: {options}"


class Executor:
    def __init__(
        self,
        catalog: Catalog,
        backends: BackendSuite,
        templates: TemplateLibrary,
        task_prompts: dict[str, str],
        metadata: dict[str, str] | None = None,
        page_limit: int = PAGE_LIMIT,
        verify_cfe_flip: bool = True,
    ):
        self.catalog = catalog
        self.backends = backends
        self.templates = templates
        self.task_prompts = task_prompts
        self.metadata = metadata or {}
        self.page_limit = page_limit
        self.verify_cfe_flip = verify_cfe_flip

    # -- plumbing -------------------------------------------------------------

    def _task_prompt(self, key: str, rc: RunContext) -> str:
        if key in rc.prompt_overrides:
            return rc.prompt_overrides[key]
        return self.task_prompts[key]

    def _generate(
        self, prompt: str, provenance: list[BackendCall], max_new_tokens: int = FREE_TEXT_MAX_NEW_TOKENS
    ) -> str:
        response = self.backends.generation.generate(
            GenerationRequest(prompt=prompt, max_new_tokens=max_new_tokens, temperature=0.0)
        )
        provenance.append(BackendCall(kind="generate", prompt=prompt, response=response.text))
        return response.text

    # -- prediction -----------------------------------------------------------

    def _label_candidates(self, ds: Dataset, instance: Instance) -> list[tuple[str, str]]:
        """(canonical label name, matchable display text) pairs."""
        if ds.task == Task.FACT_CHECKING:
            return [(name, name) for name in ds.label_names]
        return list(zip(ds.label_names, instance.choices()))

    def _map_label(self, generation: str, candidates: list[tuple[str, str]]) -> tuple[str, str]:
        """Case-insensitive longest matching label text; unmatched -> unknown."""
        haystack = generation.lower()
        best: tuple[str, str] | None = None
        for name, display in candidates:
            if display.lower() in haystack:
                if best is None or len(display) > len(best[1]):
                    best = (name, display)
        if best is None:
            return "unknown", generation.strip()
        return best

    def _predict_text_prompt(self, ds: Dataset, instance: Instance, rc: RunContext) -> str:
        if ds.task == Task.FACT_CHECKING:
            template = self._task_prompt("predict_fact_checking", rc)
            return template.format_map(_SafeDict(
                claim=instance.fields["claim"],
                evidence=instance.fields["evidence"],
                labels=", ".join(ds.label_names),
            ))
        template = self._task_prompt("predict_cqa", rc)
        return template.format_map(_SafeDict(
            question=instance.fields["question"],
            choices=" / ".join(instance.choices()),
        ))

    def predict_instance(
        self, instance: Instance, rc: RunContext, provenance: list[BackendCall]
    ) -> tuple[CachedPrediction, bool]:
        """Cached prediction for an instance; returns (prediction, was_cached)."""
        before = rc.cache.get(instance.id)
        if before is not None:
            return before, True

        def compute() -> CachedPrediction:
            prompt = self._predict_text_prompt(rc.dataset, instance, rc)
            raw = self._generate(prompt, provenance, max_new_tokens=PREDICT_MAX_NEW_TOKENS)
            label, _ = self._map_label(raw, self._label_candidates(rc.dataset, instance))
            return CachedPrediction(label=label, raw=raw, timestamp=time.time())

        return rc.cache.insert_or_get(instance.id, compute), False

    def _display_label(self, ds: Dataset, instance: Instance, label: str) -> str:
        if label == "unknown":
            return "unknown"
        if ds.task == Task.COMMONSENSE_QA:
            return dict(zip(ds.label_names, instance.choices())).get(label, label)
        return label

    def exec_predict(self, instance: Instance, rc: RunContext) -> ExecutionResult:
        provenance: list[BackendCall] = []
        prediction, cached = self.predict_instance(instance, rc, provenance)
        display = self._display_label(rc.dataset, instance, prediction.label)
        text = self.templates.render(
            "predict", rc.rng, id=instance.id, label=display, raw=prediction.raw.strip()
        )
        if prediction.label == "unknown":
            text = self.templates.render(
                "predict_unknown", rc.rng, id=instance.id, raw=prediction.raw.strip()
            )
        payload = {
            "kind": "prediction",
            "id": instance.id,
            "label": prediction.label,
            "display_label": display,
            "raw": prediction.raw,
            "cached": cached,
        }
        return ExecutionResult("predict", [payload], text, provenance)

    def exec_randompredict(self, n: int, rc: RunContext) -> ExecutionResult:
        total = len(rc.dataset.instances)
        if not 1 <= n <= total:
            raise RangeError(f"can only sample between 1 and {total} instances, got {n}")
        provenance: list[BackendCall] = []
        chosen = rc.rng.sample(rc.dataset.instances, n)
        entries = []
        for instance in sorted(chosen, key=lambda i: i.id):
            prediction, _ = self.predict_instance(instance, rc, provenance)
            entries.append({"id": instance.id, "label": prediction.label})
        text = self.templates.render(
            "randompredict", rc.rng, n=n,
            ids=", ".join(str(e["id"]) for e in entries),
        )
        payload = {"kind": "prediction_batch", "n": n, "predictions": entries}
        return ExecutionResult("randompredict", [payload], text, provenance)

    # -- evaluation over a subset ----------------------------------------------

    def _predictions_for(
        self, subset: list[Instance], rc: RunContext, provenance: list[BackendCall]
    ) -> list[tuple[Instance, CachedPrediction]]:
        pairs = []
        for instance in subset:
            if instance.gold_label is None:
                continue
            prediction, _ = self.predict_instance(instance, rc, provenance)
            pairs.append((instance, prediction))
        return pairs

    def mistakes(self, subset: list[Instance], rc: RunContext, provenance: list[BackendCall]):
        pairs = self._predictions_for(subset, rc, provenance)
        wrong = [
            (inst, pred)
            for inst, pred in pairs
            if pred.label != rc.dataset.label_name(inst.gold_label)
        ]
        return pairs, wrong

    def exec_mistakes(self, subset: list[Instance], mode: str, rc: RunContext) -> ExecutionResult:
        provenance: list[BackendCall] = []
        pairs, wrong = self.mistakes(subset, rc, provenance)
        count = len(wrong)
        if mode == "count":
            text = self.templates.render("mistakes_count", rc.rng, count=count, total=len(pairs))
            payload = {"kind": "mistakes", "mode": "count", "count": count, "total": len(pairs)}
            return ExecutionResult("mistakes count", [payload], text, provenance)
        lines = [
            f"[{inst.id}] gold: {rc.dataset.label_name(inst.gold_label)} | predicted: {pred.label}"
            for inst, pred in wrong[: self.page_limit]
        ]
        if count > self.page_limit:
            lines.append(f"... and {count - self.page_limit} more")
        listing = "\n".join(lines) if lines else "(none)"
        text = self.templates.render("mistakes_show", rc.rng, count=count, listing=listing)
        payload = {
            "kind": "mistakes",
            "mode": "show",
            "count": count,
            "total": len(pairs),
            "items": [
                {"id": inst.id, "gold": rc.dataset.label_name(inst.gold_label), "predicted": pred.label}
                for inst, pred in wrong
            ],
        }
        return ExecutionResult("mistakes show", [payload], text, provenance)

    def score(
        self, subset: list[Instance], metric: str, rc: RunContext, provenance: list[BackendCall]
    ) -> dict:
        pairs = self._predictions_for(subset, rc, provenance)
        if not pairs:
            raise EmptySubset()
        gold = [rc.dataset.label_name(inst.gold_label) for inst, _ in pairs]
        predicted = [pred.label for _, pred in pairs]
        labels = rc.dataset.label_names
        support = {name: gold.count(name) for name in labels}

        if metric == "accuracy":
            value = sum(g == p for g, p in zip(gold, predicted)) / len(pairs)
        else:
            per_label = []
            for name in labels:
                tp = sum(1 for g, p in zip(gold, predicted) if g == name and p == name)
                fp = sum(1 for g, p in zip(gold, predicted) if g != name and p == name)
                fn = sum(1 for g, p in zip(gold, predicted) if g == name and p != name)
                precision = tp / (tp + fp) if tp + fp else 0.0
                recall = tp / (tp + fn) if tp + fn else 0.0
                if metric == "precision":
                    per_label.append(precision)
                elif metric == "recall":
                    per_label.append(recall)
                else:  # f1, macro
                    if precision + recall:
                        per_label.append(2 * precision * recall / (precision + recall))
                    else:
                        per_label.append(0.0)
            value = sum(per_label) / len(per_label)
        return {"kind": "score", "metric": metric, "value": value, "n": len(pairs), "support": support}

    def exec_score(self, subset: list[Instance], metric: str, rc: RunContext) -> ExecutionResult:
        provenance: list[BackendCall] = []
        payload = self.score(subset, metric, rc, provenance)
        support = ", ".join(f"{k}: {v}" for k, v in payload["support"].items())
        text = self.templates.render(
            "score", rc.rng, metric=metric, value_pct=f"{payload['value'] * 100:.2f}",
            n=payload["n"], support=support,
        )
        return ExecutionResult("score", [payload], text, provenance)

    # -- explanations -----------------------------------------------------------

    def exec_nlpattribute(
        self, instance: Instance, topk: int | None, method: str, rc: RunContext
    ) -> ExecutionResult:
        provenance: list[BackendCall] = []
        if self.backends.attribution is None:
            raise AttributionUnavailable("no attribution backend configured")
        prediction, _ = self.predict_instance(instance, rc, provenance)
        target = self._display_label(rc.dataset, instance, prediction.label)
        result = self.backends.attribution.attribute(instance.text(), target, method)
        provenance.append(BackendCall(kind="attribute", prompt=instance.text(), response=method))

        n = len(result.tokens)
        k = n if topk is None else min(topk, n)
        order = sorted(range(n), key=lambda i: (-abs(result.scores[i]), i))[:k]
        top_lines = [
            f"{rank + 1}. {result.tokens[i]} ({result.scores[i]:+.4f})"
            for rank, i in enumerate(order)
        ]
        heatmap = _text_heatmap(result.tokens, result.scores)
        text = self.templates.render(
            "nlpattribute", rc.rng, id=instance.id, method=method, k=k,
            topk_list="\n".join(top_lines), heatmap=heatmap,
        )
        payload = {
            "kind": "attribution",
            "id": instance.id,
            "method": method,
            "tokens": list(result.tokens),
            "scores": list(result.scores),
            "topk": k,
            "top_indices": order,
        }
        return ExecutionResult("nlpattribute", [payload], text, provenance)

    def exec_rationalize(self, instance: Instance, rc: RunContext) -> ExecutionResult:
        provenance: list[BackendCall] = []
        prediction, _ = self.predict_instance(instance, rc, provenance)
        display = self._display_label(rc.dataset, instance, prediction.label)
        strategy_block = rc.cot.template.format(instance=_instance_block(rc.dataset, instance))
        prompt = self._task_prompt("rationalize", rc).format_map(_SafeDict(
            preamble=rc.expertise.role_preamble,
            label=display,
            strategy_block=strategy_block,
        ))
        rationale = self._generate(prompt, provenance).strip()
        text = self.templates.render(
            "rationalize", rc.rng, id=instance.id, label=display, rationale=rationale
        )
        payload = {
            "kind": "text",
            "subkind": "rationale",
            "id": instance.id,
            "label": prediction.label,
            "text": rationale,
            "strategy": rc.cot.name,
        }
        return ExecutionResult("rationalize", [payload], text, provenance)

    def exec_augment(self, instance: Instance, rc: RunContext) -> ExecutionResult:
        provenance: list[BackendCall] = []
        field_name = rc.dataset.primary_field
        original = instance.fields[field_name]
        prompt = self._task_prompt("augment", rc).format_map(_SafeDict(text=original))
        candidate = self._generate(prompt, provenance).strip()
        note = ""
        if _same_text(candidate, original):
            retry_prompt = prompt + "\nUse different wording than the original."
            candidate = self._generate(retry_prompt, provenance).strip()
            if _same_text(candidate, original):
                note = "The rewrite came back identical to the original, so there is nothing new to add."
        new_fields = dict(instance.fields)
        new_fields[field_name] = candidate
        text = self.templates.render(
            "augment", rc.rng, id=instance.id, field=field_name, text=candidate, note=note
        ).rstrip()
        payload = {
            "kind": "text",
            "subkind": "augment",
            "id": instance.id,
            "field": field_name,
            "text": candidate,
            "candidate_fields": new_fields,
            "copy_of_original": _same_text(candidate, original),
        }
        return ExecutionResult("augment", [payload], text, provenance)

    def exec_cfe(self, instance: Instance, rc: RunContext) -> ExecutionResult:
        provenance: list[BackendCall] = []
        prediction, _ = self.predict_instance(instance, rc, provenance)
        display = self._display_label(rc.dataset, instance, prediction.label)
        target = self._cfe_target(rc.dataset, instance, prediction.label)
        field_name = rc.dataset.primary_field
        prompt = self._task_prompt("cfe", rc).format_map(_SafeDict(
            text=instance.fields[field_name], label=display, target_label=target
        ))
        edit = self._generate(prompt, provenance).strip()

        flip_confirmed: bool | None = None
        new_label: str | None = None
        if self.verify_cfe_flip and edit:
            edited_fields = dict(instance.fields)
            edited_fields[field_name] = edit
            check_instance = Instance(
                id=instance.id, fields=edited_fields, gold_label=None, source=instance.source
            )
            check_prompt = self._predict_text_prompt(rc.dataset, check_instance, rc)
            raw = self._generate(check_prompt, provenance, max_new_tokens=PREDICT_MAX_NEW_TOKENS)
            new_label, _ = self._map_label(raw, self._label_candidates(rc.dataset, check_instance))
            flip_confirmed = new_label != prediction.label and new_label != "unknown"

        if flip_confirmed is None:
            flip_note = ""
        elif flip_confirmed:
            flip_note = f"Flip confirmed: re-prediction gives {self._display_label(rc.dataset, instance, new_label)}."
        else:
            flip_note = "Candidate counterfactual (unverified flip): re-prediction kept the original label."
        text = self.templates.render(
            "cfe", rc.rng, id=instance.id, label=display, edit=edit, flip_note=flip_note
        ).rstrip()
        payload = {
            "kind": "text",
            "subkind": "cfe",
            "id": instance.id,
            "edit": edit,
            "original_label": prediction.label,
            "new_label": new_label,
            "flip_confirmed": flip_confirmed,
        }
        return ExecutionResult("cfe", [payload], text, provenance)

    def _cfe_target(self, ds: Dataset, instance: Instance, label: str) -> str:
        if ds.task == Task.FACT_CHECKING and len(ds.label_names) == 2 and label in ds.label_names:
            other = [n for n in ds.label_names if n != label]
            return other[0]
        return "a different answer"

    # -- meta and tutorial --------------------------------------------------------

    def exec_meta(self, op: str, rc: RunContext) -> ExecutionResult:
        ds = rc.dataset
        values = {
            "dataset_name": ds.name,
            "dataset_size": len(ds.instances),
            "labels": ", ".join(ds.label_names),
            "task": ds.task.value,
            "backend_id": self.backends.generation.backend_id,
            "op_count": self.catalog.count_operations(),
            "description": "",
        }
        key = {
            "data": "dataset_description",
            "model": "model_card",
            "function": "function_description",
            "self": "self_description",
        }[op]
        values["description"] = self.metadata.get(key, "")
        if op == "data" and not values["description"]:
            values["description"] = ds.metadata
        text = self.templates.render(op, rc.rng, **values)
        payload = {"kind": "meta", "op": op, "text": text}
        return ExecutionResult(op, [payload], text, [])

    def exec_qatutorial(self, op_name: str, rc: RunContext) -> ExecutionResult:
        spec = self.catalog.lookup(op_name)  # raises NotFound for unknown ops
        provenance: list[BackendCall] = []
        prompt = self._task_prompt("qatutorial", rc).format_map(_SafeDict(
            preamble=rc.expertise.role_preamble,
            op_name=spec.name,
            description=spec.description,
        ))
        explanation = self._generate(prompt, provenance).strip()
        text = self.templates.render(
            "qatutorial", rc.rng, op_name=spec.name, text=explanation
        )
        payload = {"kind": "text", "subkind": "tutorial", "op_name": spec.name, "text": explanation}
        return ExecutionResult("qatutorial", [payload], text, provenance)

    # -- data ops ------------------------------------------------------------------

    def exec_show(self, subset: list[Instance], rc: RunContext) -> ExecutionResult:
        listing = show(rc.dataset, subset, page_size=self.page_limit)
        text = self.templates.render("show", rc.rng, count=len(subset), listing=listing)
        payload = {
            "kind": "instances",
            "count": len(subset),
            "items": [
                {"id": i.id, "fields": i.fields,
                 "label": rc.dataset.label_name(i.gold_label) if i.gold_label is not None else None}
                for i in subset[: self.page_limit]
            ],
        }
        return ExecutionResult("show", [payload], text, [])

    def exec_countdata(self, subset: list[Instance], rc: RunContext) -> ExecutionResult:
        count = len(subset)
        text = self.templates.render("countdata", rc.rng, count=count)
        return ExecutionResult("countdata", [{"kind": "count", "count": count}], text, [])

    def exec_label(self, subset: list[Instance], rc: RunContext) -> ExecutionResult:
        distribution = label_distribution(rc.dataset, subset)
        rendered = ", ".join(f"{name}: {count}" for name, count in distribution.items())
        text = self.templates.render(
            "label", rc.rng, distribution=rendered, total=sum(distribution.values())
        )
        payload = {"kind": "distribution", "counts": distribution}
        return ExecutionResult("label", [payload], text, [])

    def exec_keywords(self, k: int, subset: list[Instance] | None, rc: RunContext) -> ExecutionResult:
        ranked = keywords(rc.dataset, k, subset)
        listing = ", ".join(f"{token} ({count})" for token, count in ranked)
        text = self.templates.render("keywords", rc.rng, k=len(ranked), listing=listing)
        payload = {"kind": "keywords", "items": [{"token": t, "count": c} for t, c in ranked]}
        return ExecutionResult("keywords", [payload], text, [])

    def exec_similarity(self, instance: Instance, k: int, rc: RunContext) -> ExecutionResult:
        neighbors = similar_topk(rc.dataset, instance, k, self.backends.embedding)
        lines = [
            f"[{inst.id}] (similarity {score:.3f}) {render_instance(rc.dataset, inst)}"
            for inst, score in neighbors
        ]
        text = self.templates.render(
            "similarity", rc.rng, id=instance.id, k=len(neighbors), listing="\n".join(lines) or "(none)"
        )
        payload = {
            "kind": "neighbors",
            "id": instance.id,
            "items": [{"id": inst.id, "score": score} for inst, score in neighbors],
        }
        return ExecutionResult("similarity", [payload], text, [])

    # -- query dispatch ---------------------------------------------------------------

    def exec_query(self, ast: QueryAst, rc: RunContext) -> ExecutionResult:
        """Filters establish the scope; operations run left-to-right over it."""
        if ast.filters:
            scope = apply_filters(rc.dataset, list(ast.filters), ast.connective)
            scoped = True
        else:
            scope = list(rc.dataset.instances)
            scoped = False

        payloads: list[dict] = []
        fragments: list[str] = []
        provenance: list[BackendCall] = []
        for op in ast.operations:
            result = self._exec_op(op, scope, scoped, rc)
            payloads.extend(result.payloads)
            if result.response_text:
                fragments.append(result.response_text)
            provenance.extend(result.provenance)
        return ExecutionResult(
            op=" and ".join(o.op for o in ast.operations),
            payloads=payloads,
            response_text="\n\n".join(fragments),
            provenance=provenance,
        )

    def _instance_scope(self, scope: list[Instance], scoped: bool, rc: RunContext) -> list[Instance]:
        """Scope for instance-bound ops: explicit filters win, else dialogue scope."""
        if scoped:
            return scope
        if rc.active_scope:
            return rc.active_scope
        return []

    def _exec_op(self, op: OpNode, scope: list[Instance], scoped: bool, rc: RunContext) -> ExecutionResult:
        name = op.op
        attrs = op.resolved_attrs(self.catalog) if name in self.catalog else {}

        if name in ("data", "model", "function", "self"):
            return self.exec_meta(name, rc)
        if name == "qatutorial":
            return self.exec_qatutorial(attrs["op_name"], rc)
        if name == "show":
            return self.exec_show(scope, rc)
        if name == "countdata":
            return self.exec_countdata(scope, rc)
        if name == "label":
            return self.exec_label(scope if scoped else None, rc)
        if name == "keywords":
            return self.exec_keywords(attrs["topk"], scope if scoped else None, rc)
        if name == "randompredict":
            return self.exec_randompredict(attrs["count"], rc)
        if name == "mistakes show":
            return self.exec_mistakes(scope, "show", rc)
        if name == "mistakes count":
            return self.exec_mistakes(scope, "count", rc)
        if name == "score":
            return self.exec_score(scope, attrs["metric"], rc)

        # Instance-scoped operations: run per instance up to the page limit.
        instances = self._instance_scope(scope, scoped, rc)
        if not instances:
            text = self.templates.render("empty_scope", rc.rng, op=name)
            return ExecutionResult(name, [{"kind": "empty", "op": name}], text, [])

        per_instance = instances[: self.page_limit]
        merged_payloads: list[dict] = []
        merged_fragments: list[str] = []
        merged_provenance: list[BackendCall] = []
        for instance in per_instance:
            try:
                result = self._exec_instance_op(name, attrs, instance, rc)
            except AttributionUnavailable:
                text = self.templates.render("attribution_unavailable", rc.rng, id=instance.id)
                result = ExecutionResult(name, [{"kind": "degraded", "op": name}], text, [])
            merged_payloads.extend(result.payloads)
            merged_fragments.append(result.response_text)
            merged_provenance.extend(result.provenance)
        if len(instances) > self.page_limit:
            merged_fragments.append(
                f"(showing the first {self.page_limit} of {len(instances)} instances in scope)"
            )
        return ExecutionResult(
            name, merged_payloads, "\n\n".join(merged_fragments), merged_provenance
        )

    def _exec_instance_op(
        self, name: str, attrs: dict, instance: Instance, rc: RunContext
    ) -> ExecutionResult:
        if name == "predict":
            return self.exec_predict(instance, rc)
        if name == "nlpattribute":
            return self.exec_nlpattribute(instance, attrs["topk"], attrs["method"], rc)
        if name == "rationalize":
            return self.exec_rationalize(instance, rc)
        if name == "similarity":
            return self.exec_similarity(instance, attrs["topk"], rc)
        if name == "cfe":
            return self.exec_cfe(instance, rc)
        if name == "augment":
            return self.exec_augment(instance, rc)
        raise UnknownOperation(name)


def _same_text(a: str, b: str) -> bool:
    return " ".join(a.lower().split()) == " ".join(b.lower().split())


_HEAT_BLOCKS = " ░▒▓█"


def _text_heatmap(tokens, scores) -> str:
    magnitudes = [abs(s) for s in scores]
    peak = max(magnitudes) if magnitudes else 0.0
    parts = []
    for token, magnitude in zip(tokens, magnitudes):
        level = 0 if peak == 0 else min(4, int(round(magnitude / peak * 4)))
        parts.append(f"{token}{_HEAT_BLOCKS[level]}" if level else token)
    return " ".join(parts)


def load_task_prompts(directory: str | Path) -> dict[str, str]:
    """Read the task prompt files (predict/rationalize/augment/cfe/qatutorial)."""
    directory = Path(directory)
    prompts = {}
    for path in sorted(directory.glob("*.txt")):
        prompts[path.stem] = path.read_text(encoding="utf-8")
    required = {"predict_fact_checking", "predict_cqa", "rationalize", "augment", "cfe", "qatutorial"}
    missing = required - prompts.keys()
    if missing:
        raise FileNotFoundError(f"missing task prompt files: {sorted(missing)}")
    return prompts
