"""The workbench wires catalog, backends, parsing, execution and dialogue.

One workbench serves one dataset with one backend suite; sessions are
created from it and stay fully independent of each other (own cache, RNG,
settings, suggestion history).
"""

from __future__ import annotations

import random
from importlib import resources as importlib_resources
from pathlib import Path

from .backends.protocol import BackendSuite
from .backends.search import DisabledSearchProvider, SearchProvider
from .catalog.ast import QueryAst
from .catalog.ops import Catalog, catalog_default
from .data.ops import keywords
from .data.store import Dataset, Instance
from .dialogue.session import Session, SessionSettings, Turn, export_session, handle_turn
from .dialogue.suggest import Suggestion, SuggestionRule
from .executor.run import (
    COT_STRATEGIES,
    EXPERTISE_LEVELS,
    ExecutionResult,
    Executor,
    RunContext,
    load_task_prompts,
)
from .executor.templates import TemplateLibrary
from .parsing.engine import (
    DialogueSummary,
    ParseContext,
    ParseResult,
    ParsingEngine,
    Strategy,
    StrategyProfile,
)
from .parsing.prompts import PromptStore


def default_resource_dir() -> Path:
    return Path(str(importlib_resources.files("chatprobe") / "resources"))


class Workbench:
    def __init__(
        self,
        dataset: Dataset,
        backends: BackendSuite,
        catalog: Catalog | None = None,
        resource_dir: str | Path | None = None,
        metadata: dict[str, str] | None = None,
        profile: StrategyProfile | None = None,
        default_settings: SessionSettings | None = None,
        max_new_tokens: int = 10,
        verify_cfe_flip: bool = True,
        seed: int = 0,
        search_provider: SearchProvider | None = None,
    ):
        self.dataset = dataset
        self.backends = backends
        self.catalog = catalog or catalog_default()
        base = Path(resource_dir) if resource_dir is not None else default_resource_dir()
        self.resource_dir = base
        self.prompt_store = PromptStore.load(base / "prompts")
        self.prompt_store.check(self.catalog)
        self.templates = TemplateLibrary(base / "templates")
        self.task_prompts = load_task_prompts(base / "prompts" / "tasks")
        self.suggestion_rule = SuggestionRule(self.catalog, base / "suggestions" / "questions.jsonl")
        self.metadata = metadata or {}
        self.profile = profile or StrategyProfile()
        self.default_settings = default_settings or SessionSettings()
        self.max_new_tokens = max_new_tokens
        self.engine = ParsingEngine(self.catalog, backends, self.profile)
        self.executor = Executor(
            self.catalog,
            backends,
            self.templates,
            self.task_prompts,
            metadata=self.metadata,
            verify_cfe_flip=verify_cfe_flip,
        )
        self.search_provider = search_provider or DisabledSearchProvider()
        self.seed = seed
        self._seed_rng = random.Random(seed)

    # -- sessions -------------------------------------------------------------

    def new_session(
        self,
        seed: int | None = None,
        settings: SessionSettings | None = None,
        session_id: str | None = None,
    ) -> Session:
        if seed is None:
            seed = self._seed_rng.randrange(2**31)
        base = settings or self.default_settings
        own = SessionSettings(
            expertise=base.expertise,
            cot_strategy=base.cot_strategy,
            parsing_strategy=base.parsing_strategy,
            prompt_overrides=dict(base.prompt_overrides),
        )
        return Session(runtime=self, seed=seed, settings=own, session_id=session_id)

    def handle_turn(self, session: Session, user_text: str) -> Turn:
        return handle_turn(session, user_text)

    def export(self, session: Session) -> dict:
        return export_session(session)

    def replay(self, document: dict, session_id: str | None = None) -> Session:
        """Re-run an exported dialogue on a fresh session (same seed and settings)."""
        settings_doc = dict(document.get("settings", {}))
        seed = settings_doc.pop("rng_seed", 0)
        settings = SessionSettings(
            expertise=settings_doc.get("expertise", "intermediate"),
            cot_strategy=settings_doc.get("cot_strategy", "zero_cot"),
            parsing_strategy=settings_doc.get("parsing_strategy", Strategy.MP.value),
            prompt_overrides=dict(settings_doc.get("prompt_overrides", {})),
        )
        session = self.new_session(seed=seed, settings=settings, session_id=session_id)
        for turn in document.get("turns", []):
            handle_turn(session, turn["user_text"])
        return session

    # -- Runtime protocol -------------------------------------------------------

    def parse_context(self, session: Session) -> ParseContext:
        return ParseContext(
            dataset_size=self.dataset.size,
            custom_input_ids=frozenset(self.dataset.custom_input_ids()),
            dialogue=DialogueSummary(
                last_op=session.last_op, last_instance_id=session.last_instance_id
            ),
            max_new_tokens=self.max_new_tokens,
        )

    def parse_utterance(self, session: Session, utterance: str) -> ParseResult:
        store = self.prompt_store.with_overrides(session.settings.prompt_overrides)
        strategy = Strategy(session.settings.parsing_strategy)
        return self.engine.parse(utterance, store, self.parse_context(session), strategy)

    def run_context(self, session: Session) -> RunContext:
        active: list[Instance] = []
        for instance_id in session.active_instance_ids:
            if self.dataset.has_id(instance_id):
                active.append(self.dataset.by_id(instance_id))
        return RunContext(
            dataset=self.dataset,
            cache=session.cache,
            rng=session.rng,
            expertise=EXPERTISE_LEVELS[session.settings.expertise],
            cot=COT_STRATEGIES[session.settings.cot_strategy],
            prompt_overrides=session.settings.prompt_overrides,
            active_scope=active,
        )

    def execute_ast(self, session: Session, ast: QueryAst) -> ExecutionResult:
        return self.executor.exec_query(ast, self.run_context(session))

    def next_suggestion(self, session: Session) -> Suggestion | None:
        return self.suggestion_rule.suggest(
            last_op=session.last_op,
            history=session.suggestion_history,
            instance_id=session.last_instance_id,
            token=self.top_token(),
        )

    def render_template(self, session: Session, name: str, **values) -> str:
        return self.templates.render(name, session.rng, **values)

    def example_questions(self, session: Session, n: int) -> list[str]:
        pool = self.prompt_store.gd_pool
        picked = session.rng.sample(pool, min(n, len(pool)))
        return [d.utterance for d in picked]

    def embedding_backend(self):
        return self.backends.embedding

    def top_token(self) -> str:
        ranked = keywords(self.dataset, 1)
        return ranked[0][0] if ranked else "data"
