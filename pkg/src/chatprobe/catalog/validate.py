"""Contextual validation of parsed queries.

Violations are data, not exceptions: callers decide whether to repair,
clarify, or reject.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .ast import QueryAst
from .ops import Catalog


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, code: str, message: str) -> None:
        self.violations.append(Violation(code, message))

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}


def validate(
    ast: QueryAst,
    catalog: Catalog,
    dataset_size: int,
    custom_input_ids: Iterable[int] = (),
    has_instance_context: bool = False,
) -> ValidationReport:
    """Check a query against the catalog and the current data context.

    ``has_instance_context`` marks that the dialogue already holds an active
    instance, which lets instance-scoped operations run without an explicit
    filter in this query.
    """
    custom_ids = set(custom_input_ids)
    report = ValidationReport()

    if not ast.filters and not ast.operations:
        report.add("empty_query", "query has neither filters nor operations")
        return report
    if ast.is_pure_filter:
        report.add("pure_filter", "query selects instances but requests no operation")

    for f in ast.filters:
        if f.kind == "id":
            if f.id is None or f.id < 0:
                report.add("bad_attribute", "id filter requires a nonnegative id")
            elif f.id >= dataset_size and f.id not in custom_ids:
                report.add(
                    "id_out_of_range",
                    f"id {f.id} is outside the dataset (size {dataset_size}) "
                    "and is not a custom input",
                )
        elif not (f.token or "").strip():
            report.add("bad_attribute", "includes filter requires a non-empty token")

    for op in ast.operations:
        if op.op not in catalog:
            report.add("unknown_operation", f"operation {op.op!r} is not in the catalog")
            continue
        spec = catalog.lookup(op.op)
        schema_names = {a.name for a in spec.attributes}
        for attr_name, value in op.attrs:
            if attr_name not in schema_names:
                report.add("bad_attribute", f"{op.op} has no attribute {attr_name!r}")
                continue
            schema = spec.schema_for(attr_name)
            try:
                schema.coerce(str(value))
            except ValueError as exc:
                report.add("bad_attribute", f"{op.op}.{attr_name}: {exc}")
            if schema.name == "op_name" and str(value) not in catalog:
                report.add("bad_attribute", f"{op.op} refers to unknown operation {value!r}")
        if spec.accepts_custom_input and not ast.filters and not has_instance_context:
            report.add(
                "missing_instance_scope",
                f"{op.op} needs an instance in scope (add a filter)",
            )

    if ast.connective.value == "or" and len(ast.filters) < 2:
        report.add("or_outside_filters", "'or' may only join two or more filters")
    if "or_outside_filters" in ast.anomalies:
        report.add("or_outside_filters", "'or' may only appear between filters")
    if "mixed_filter_connectives" in ast.anomalies:
        report.add("mixed_filter_connectives", "filters must be joined by a single connective")

    # Deduplicate repeated codes that carry the same message.
    seen: set[tuple[str, str]] = set()
    unique = []
    for v in report.violations:
        key = (v.code, v.message)
        if key not in seen:
            seen.add(key)
            unique.append(v)
    report.violations = unique
    return report
