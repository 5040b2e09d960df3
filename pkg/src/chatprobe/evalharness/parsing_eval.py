"""Exact-match parsing accuracy over a gold set of (utterance, query) pairs."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from ..catalog.ops import Catalog
from ..catalog.parser import canonicalize
from ..catalog.ast import QueryError
from ..parsing.engine import ParseContext, ParsingEngine, Strategy, Unparseable
from ..parsing.prompts import PromptStore

logger = logging.getLogger(__name__)

MIN_OP_COVERAGE = 3
SWEEP_MAX_NEW_TOKENS = (10, 20)
UNPARSEABLE = "<unparseable>"


class GoldsetSchemaError(Exception):
    pass


class InvalidGoldParse(Exception):
    def __init__(self, line: int, parse: str, reason: str):
        self.line = line
        self.parse = parse
        super().__init__(f"line {line}: gold parse {parse!r} does not validate: {reason}")


@dataclass(frozen=True)
class GoldPair:
    utterance: str
    gold_parse: str


@dataclass
class Failure:
    utterance: str
    gold: str
    predicted: str


@dataclass
class EvalReport:
    strategy: str
    backend_id: str
    max_new_tokens: int
    total: int
    matches: int
    confusion: dict[str, dict[str, int]]
    failures: list[Failure] = field(default_factory=list)
    match_flags: list[bool] = field(default_factory=list)

    @property
    def exact_match_accuracy(self) -> float:
        return self.matches / self.total if self.total else 0.0

    def accuracy_pct(self) -> str:
        """Accuracy in percent with two decimals, e.g. '75.00'."""
        return f"{self.exact_match_accuracy * 100:.2f}"


def build_goldset(path: str | Path, catalog: Catalog | None = None) -> list[GoldPair]:
    """Load and check a goldset; warns when an operation has thin coverage.

    Gold parses are canonicalized on load, so matching stays symmetric under
    whitespace and case; a parse the language cannot express at all raises
    InvalidGoldParse with its line number.
    """
    pairs: list[GoldPair] = []
    path = Path(path)
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        raw = raw.strip()
        if not raw:
            continue
        try:
            row = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise GoldsetSchemaError(f"line {line_no}: invalid JSON: {exc}") from None
        if "utterance" not in row or "parse" not in row:
            raise GoldsetSchemaError(f"line {line_no}: rows need 'utterance' and 'parse'")
        parse = str(row["parse"])
        try:
            canonical = canonicalize(parse, catalog)
        except QueryError as exc:
            raise InvalidGoldParse(line_no, parse, str(exc)) from None
        pairs.append(GoldPair(utterance=str(row["utterance"]), gold_parse=canonical))

    if catalog is not None:
        coverage = goldset_coverage(pairs, catalog)
        thin = {op: n for op, n in coverage.items() if n < MIN_OP_COVERAGE}
        if thin:
            logger.warning("goldset has thin operation coverage: %s", sorted(thin.items()))
    return pairs


def goldset_coverage(pairs: list[GoldPair], catalog: Catalog) -> dict[str, int]:
    """How many gold parses exercise each catalog operation (filters included)."""
    from ..catalog.parser import parse_query

    counts = {op.name: 0 for op in catalog.operations()}
    for pair in pairs:
        ast = parse_query(pair.gold_parse, catalog)
        seen = set(ast.op_names())
        for f in ast.filters:
            seen.add("filter" if f.kind == "id" else "includes")
        for name in seen:
            if name in counts:
                counts[name] += 1
    return counts


def _primary_op(parse: str, catalog: Catalog | None) -> str:
    from ..catalog.parser import parse_query

    try:
        ast = parse_query(parse, catalog)
    except QueryError:
        return UNPARSEABLE
    names = ast.op_names()
    return names[0] if names else UNPARSEABLE


def eval_parsing(
    goldset: list[GoldPair],
    engine: ParsingEngine,
    store: PromptStore,
    strategy: Strategy,
    max_new_tokens: int = 10,
    dataset_size: int = 1000,
) -> EvalReport:
    """Parse every gold utterance; a pair matches iff the canonical rendering
    equals the gold string exactly. Unparseable counts as a mismatch."""
    if not goldset:
        raise GoldsetSchemaError("goldset is empty")
    ctx = ParseContext(dataset_size=dataset_size, max_new_tokens=max_new_tokens)
    confusion: dict[str, dict[str, int]] = {}
    failures: list[Failure] = []
    flags: list[bool] = []
    matches = 0
    for pair in goldset:
        try:
            result = engine.parse(pair.utterance, store, ctx, strategy)
            predicted = result.render(engine.catalog)
        except Unparseable:
            predicted = UNPARSEABLE
        matched = predicted == pair.gold_parse
        matches += matched
        flags.append(matched)
        gold_op = _primary_op(pair.gold_parse, engine.catalog)
        pred_op = _primary_op(predicted, engine.catalog) if predicted != UNPARSEABLE else UNPARSEABLE
        confusion.setdefault(gold_op, {}).setdefault(pred_op, 0)
        confusion[gold_op][pred_op] += 1
        if not matched:
            failures.append(Failure(pair.utterance, pair.gold_parse, predicted))
    return EvalReport(
        strategy=strategy.value,
        backend_id=engine.backends.generation.backend_id,
        max_new_tokens=max_new_tokens,
        total=len(goldset),
        matches=matches,
        confusion=confusion,
        failures=failures,
        match_flags=flags,
    )


def eval_parsing_sweep(
    goldset: list[GoldPair],
    engine: ParsingEngine,
    store: PromptStore,
    strategy: Strategy,
    dataset_size: int = 1000,
    budgets: tuple[int, ...] = SWEEP_MAX_NEW_TOKENS,
) -> list[EvalReport]:
    """One report per generation budget (10 and 20 new tokens by default)."""
    return [
        eval_parsing(goldset, engine, store, strategy, max_new_tokens=budget,
                     dataset_size=dataset_size)
        for budget in budgets
    ]
