"""Utterance -> query parsing via guided decoding, multi-prompt, or nearest neighbor.

All strategies share a repair ladder: ids absent from both the utterance and
the dialogue context are dropped (hallucination filter), anaphora resolves to
the most recent instance, small-model profiles re-insert an id extracted from
the utterance, and unknown operation names are fuzzy-matched against the
catalog. A result is only returned once the repaired query validates.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum

from ..backends.protocol import BackendSuite, GenerationRequest, GrammarUnsupported
from ..backends.similarity import rank_by_similarity
from ..catalog.ast import Connective, FilterNode, OpNode, QueryAst, QueryError, UnknownOperation
from ..catalog.grammar import EmptyContext, GrammarContext, compile_grammar
from ..catalog.ops import Catalog
from ..catalog.parser import parse_query, render_query
from ..catalog.validate import validate
from .prompts import Demonstration, PromptStore, render_demonstrations

FUZZY_MATCH_THRESHOLD = 0.35
DEFAULT_MAX_NEW_TOKENS = 10


class Strategy(str, Enum):
    GD = "gd"
    MP = "mp"
    NEAREST_NEIGHBOR = "nn"


class Repair(str, Enum):
    FUZZY_OP_MATCH = "fuzzy_op_match"
    ID_HALLUCINATION_REMOVED = "id_hallucination_removed"
    ID_EXTRACTED_FROM_UTTERANCE = "id_extracted_from_utterance"
    DEFAULTS_FILLED = "defaults_filled"


class Unparseable(Exception):
    def __init__(self, utterance: str, reason: str, raw: list[str] | None = None):
        self.utterance = utterance
        self.reason = reason
        self.raw = raw or []
        super().__init__(f"could not parse {utterance!r}: {reason}")


@dataclass(frozen=True)
class DialogueSummary:
    """What the previous turns contribute to parsing: last op and instance."""

    last_op: str | None = None
    last_instance_id: int | None = None


@dataclass(frozen=True)
class ParseContext:
    dataset_size: int
    custom_input_ids: frozenset[int] = frozenset()
    dialogue: DialogueSummary = DialogueSummary()
    max_new_tokens: int = DEFAULT_MAX_NEW_TOKENS

    def __post_init__(self) -> None:
        if self.max_new_tokens < 1:
            raise ValueError("max_new_tokens must be >= 1")

    @property
    def has_instance_context(self) -> bool:
        return self.dialogue.last_instance_id is not None


@dataclass(frozen=True)
class StrategyProfile:
    """Per-backend parsing knobs; small models get the id-extraction pass."""

    small_model: bool = False
    gd_shots: int = 20
    stage1_max_new_tokens: int = 5


@dataclass
class ParseResult:
    ast: QueryAst
    strategy: Strategy
    raw: list[str] = field(default_factory=list)
    repairs: list[Repair] = field(default_factory=list)
    confidence: float | None = None

    def render(self, catalog: Catalog | None = None) -> str:
        return render_query(self.ast, catalog)


_NUMBER_RE = re.compile(r"\d+")
_ID_NEAR_KEYWORD_RE = re.compile(r"\b(?:id|instance|sample|row|example|point|#)\s*#?\s*(\d+)", re.I)
_ANAPHORA_RE = re.compile(
    r"\b(?:it|this (?:instance|sample|one|example|row)|that (?:instance|sample|one)|"
    r"the (?:same )?(?:instance|sample)|same one)\b",
    re.I,
)


def _utterance_numbers(utterance: str) -> list[int]:
    return [int(n) for n in _NUMBER_RE.findall(utterance)]


def _clean_generation(text: str) -> str:
    line = text.strip().splitlines()[0] if text.strip() else ""
    line = line.strip().strip("`\"'")
    return line.rstrip(".?!,;:").strip()


class ParsingEngine:
    def __init__(self, catalog: Catalog, backends: BackendSuite, profile: StrategyProfile | None = None):
        self.catalog = catalog
        self.backends = backends
        self.profile = profile or StrategyProfile()

    # -- strategy dispatch ---------------------------------------------------

    def parse(self, utterance: str, store: PromptStore, ctx: ParseContext,
              strategy: Strategy = Strategy.MP) -> ParseResult:
        if strategy == Strategy.GD:
            return self.parse_gd(utterance, store, ctx)
        if strategy == Strategy.MP:
            return self.parse_mp(utterance, store, ctx)
        return self.parse_nn(utterance, store, ctx)

    # -- guided decoding -----------------------------------------------------

    def parse_gd(self, utterance: str, store: PromptStore, ctx: ParseContext) -> ParseResult:
        pool = store.gd_pool
        if not pool:
            raise Unparseable(utterance, "demonstration pool is empty")
        demos = self._select_demonstrations(utterance, pool, self.profile.gd_shots)
        prompt = store.gd_prompt_template().format(
            demonstrations=render_demonstrations(demos), utterance=utterance
        )
        grammar_text = self._grammar_text(ctx)
        raw = self._generate_parse_text(prompt, ctx, grammar_text)
        result = self._finalize(utterance, raw, ctx, Strategy.GD, raw_texts=[raw])
        return result

    def _grammar_text(self, ctx: ParseContext) -> str | None:
        try:
            grammar = compile_grammar(
                self.catalog,
                GrammarContext(
                    dataset_size=ctx.dataset_size,
                    custom_input_ids=ctx.custom_input_ids,
                    has_instance_context=ctx.has_instance_context,
                ),
            )
        except EmptyContext:
            return None
        return grammar.text

    def _generate_parse_text(self, prompt: str, ctx: ParseContext, grammar_text: str | None) -> str:
        request = GenerationRequest(
            prompt=prompt,
            max_new_tokens=ctx.max_new_tokens,
            stop_sequences=("\n",),
            temperature=0.0,
            grammar=grammar_text if self.backends.generation.supports_grammar else None,
        )
        try:
            response = self.backends.generation.generate(request)
        except GrammarUnsupported:
            response = self.backends.generation.generate(replace(request, grammar=None))
        return response.text

    def _select_demonstrations(
        self, utterance: str, pool: list[Demonstration], shots: int
    ) -> list[Demonstration]:
        ranked = rank_by_similarity(
            utterance, [d.utterance for d in pool], self.backends.embedding
        )
        top = ranked[: max(1, shots)]
        # Least similar first, so the closest demonstrations sit nearest the
        # live question; truncation under a context budget drops from the top.
        top.reverse()
        return [pool[i] for i, _ in top]

    # -- multi-prompt ----------------------------------------------------------

    def parse_mp(self, utterance: str, store: PromptStore, ctx: ParseContext) -> ParseResult:
        raw_texts: list[str] = []
        repairs: list[Repair] = []

        op_name, stage1_raw, fuzzy = self._stage1_operation(utterance, store)
        raw_texts.append(stage1_raw)
        if fuzzy:
            repairs.append(Repair.FUZZY_OP_MATCH)

        stage2_prompt = store.stage2_template(op_name).format(utterance=utterance)
        stage2_raw = self._generate_parse_text(stage2_prompt, ctx, grammar_text=None)
        raw_texts.append(stage2_raw)

        ast = self._parse_candidate(_clean_generation(stage2_raw), repairs)
        if ast is None or op_name not in ast.op_names():
            # Stage coherence: never substitute an unrelated operation for the
            # one stage 1 chose; keep any filters stage 2 produced.
            filters = ast.filters if ast is not None else ()
            connective = ast.connective if ast is not None else None
            ast = QueryAst(
                filters=filters,
                operations=(OpNode(op=op_name),),
                connective=connective or QueryAst().connective,
            )
        return self._finalize(utterance, None, ctx, Strategy.MP,
                              raw_texts=raw_texts, ast=ast, repairs=repairs)

    def _stage1_operation(self, utterance: str, store: PromptStore) -> tuple[str, str, bool]:
        listing = "\n".join(
            f"- {op.name}: {op.description}" for op in self.catalog.operations()
        )
        demos = "\n\n".join(
            f"User question: {u}\nOperation: {o}" for u, o in store.mp_stage1_demos
        )
        prompt = store.stage1_template().format(
            operations_list=listing, demonstrations=demos, utterance=utterance
        )
        response = self.backends.generation.generate(
            GenerationRequest(
                prompt=prompt,
                max_new_tokens=self.profile.stage1_max_new_tokens,
                stop_sequences=("\n",),
                temperature=0.0,
            )
        )
        raw = response.text
        cleaned = _clean_generation(raw).lower()
        names = self.catalog.names()
        if cleaned in names:
            return cleaned, raw, False
        words = cleaned.split()
        if len(words) >= 2 and " ".join(words[:2]) in names:
            return " ".join(words[:2]), raw, False
        if words and words[0] in names:
            return words[0], raw, False
        if not cleaned:
            raise Unparseable(utterance, "stage-1 produced no operation", [raw])
        index, score = rank_by_similarity(cleaned, names, self.backends.embedding)[0]
        if score < FUZZY_MATCH_THRESHOLD:
            raise Unparseable(
                utterance,
                f"stage-1 output {cleaned!r} matches no operation (best {score:.2f})",
                [raw],
            )
        return names[index], raw, True

    # -- nearest neighbor ------------------------------------------------------

    def parse_nn(self, utterance: str, store: PromptStore, ctx: ParseContext) -> ParseResult:
        """Baseline: copy the parse of the most similar demonstration verbatim.

        No generation and no repair passes, so it is reproducible by a plain
        similarity scan over the pool; it never fails on odd input.
        """
        pool = store.gd_pool
        if not pool:
            raise Unparseable(utterance, "demonstration pool is empty")
        index, score = rank_by_similarity(
            utterance, [d.utterance for d in pool], self.backends.embedding
        )[0]
        ast = parse_query(pool[index].parse, self.catalog)
        return ParseResult(
            ast=ast, strategy=Strategy.NEAREST_NEIGHBOR, raw=[], repairs=[], confidence=score
        )

    # -- shared repair ladder ----------------------------------------------------

    def _parse_candidate(self, text: str, repairs: list[Repair]) -> QueryAst | None:
        if not text:
            return None
        try:
            return parse_query(text, self.catalog)
        except UnknownOperation as exc:
            fixed = self._fuzzy_fix_op(text, exc.name)
            if fixed is None:
                return None
            try:
                ast = parse_query(fixed, self.catalog)
            except QueryError:
                return None
            repairs.append(Repair.FUZZY_OP_MATCH)
            return ast
        except QueryError:
            return None

    def _fuzzy_fix_op(self, text: str, bad_name: str) -> str | None:
        names = self.catalog.names()
        index, score = rank_by_similarity(bad_name, names, self.backends.embedding)[0]
        if score < FUZZY_MATCH_THRESHOLD:
            return None
        return re.sub(rf"\b{re.escape(bad_name)}\b", names[index], text, count=1)

    def _finalize(
        self,
        utterance: str,
        parse_text: str | None,
        ctx: ParseContext,
        strategy: Strategy,
        raw_texts: list[str],
        ast: QueryAst | None = None,
        repairs: list[Repair] | None = None,
    ) -> ParseResult:
        repairs = list(repairs or [])
        if ast is None:
            assert parse_text is not None
            ast = self._parse_candidate(_clean_generation(parse_text), repairs)
            if ast is None:
                raise Unparseable(utterance, "generation is not a well-formed query", raw_texts)

        ast = self._repair_ids(utterance, ast, ctx, repairs)
        if self._defaults_were_filled(ast):
            repairs.append(Repair.DEFAULTS_FILLED)

        report = validate(
            ast,
            self.catalog,
            dataset_size=ctx.dataset_size,
            custom_input_ids=ctx.custom_input_ids,
            has_instance_context=ctx.has_instance_context,
        )
        if not report.ok:
            raise Unparseable(
                utterance, "; ".join(str(v) for v in report.violations), raw_texts
            )
        return ParseResult(ast=ast, strategy=strategy, raw=raw_texts, repairs=repairs)

    def _repair_ids(
        self, utterance: str, ast: QueryAst, ctx: ParseContext, repairs: list[Repair]
    ) -> QueryAst:
        mentioned = set(_utterance_numbers(utterance))
        anaphora_id: int | None = None
        if ctx.dialogue.last_instance_id is not None and _ANAPHORA_RE.search(utterance):
            anaphora_id = ctx.dialogue.last_instance_id

        kept: list[FilterNode] = []
        removed = False
        for f in ast.filters:
            if f.kind != "id":
                kept.append(f)
                continue
            assert f.id is not None
            if f.id in mentioned or f.id in ctx.custom_input_ids or f.id == anaphora_id:
                kept.append(f)
            else:
                removed = True
        if removed:
            repairs.append(Repair.ID_HALLUCINATION_REMOVED)

        has_id_filter = any(f.kind == "id" for f in kept)
        needs_instance = any(
            self.catalog.lookup(op.op).accepts_custom_input
            for op in ast.operations
            if op.op in self.catalog
        )

        if (
            self.profile.small_model
            and not has_id_filter
            and needs_instance
            and mentioned
        ):
            extracted = self._extract_id(utterance, ast)
            if extracted is not None:
                kept.insert(0, FilterNode.by_id(extracted))
                repairs.append(Repair.ID_EXTRACTED_FROM_UTTERANCE)

        connective = ast.connective
        if len(kept) < 2 and connective == Connective.OR:
            # a union of fewer than two filters degenerates to a plain chain
            connective = Connective.AND
        return replace(ast, filters=tuple(kept), connective=connective)

    def _extract_id(self, utterance: str, ast: QueryAst) -> int | None:
        near = _ID_NEAR_KEYWORD_RE.search(utterance)
        if near:
            return int(near.group(1))
        used_values = {
            value for op in ast.operations for _, value in op.attrs if isinstance(value, int)
        }
        for number in _utterance_numbers(utterance):
            if number not in used_values:
                return number
        return None

    def _defaults_were_filled(self, ast: QueryAst) -> bool:
        for op in ast.operations:
            if op.op not in self.catalog:
                continue
            spec = self.catalog.lookup(op.op)
            explicit = {name for name, _ in op.attrs}
            for schema in spec.attributes:
                if not schema.required and schema.name not in explicit:
                    return True
        return False
