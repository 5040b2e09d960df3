"""Session state and turn handling.

A session owns append-only turn history, the per-session prediction cache
and RNG, the pending follow-up suggestion, and the active filter scope that
anaphora ("this instance") and bare instance-scoped operations resolve
against. Turns within a session are strictly serialized.
"""

from __future__ import annotations

import json
import random
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Any, Protocol

from ..catalog.ast import QueryAst
from ..catalog.ops import NotFound
from ..catalog.parser import parse_query, render_query
from ..data.store import IdNotFound, PredictionCache
from ..executor.run import ExecutionResult, ExecutorError
from ..parsing.engine import ParseResult, Strategy, Unparseable
from .suggest import Decision, Suggestion, detect_confirmation, strip_decline_prefix

EXPORT_SCHEMA_VERSION = 1


@dataclass
class SessionSettings:
    expertise: str = "intermediate"
    cot_strategy: str = "zero_cot"
    parsing_strategy: str = Strategy.MP.value
    prompt_overrides: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "expertise": self.expertise,
            "cot_strategy": self.cot_strategy,
            "parsing_strategy": self.parsing_strategy,
            "prompt_overrides": dict(sorted(self.prompt_overrides.items())),
        }


@dataclass
class Turn:
    index: int
    user_text: str
    parse_text: str | None
    response_text: str
    parse_result: ParseResult | None = None
    execution: ExecutionResult | None = None
    clarification: str | None = None
    suggestion: Suggestion | None = None
    created_at: float = field(default_factory=time.time)
    completed_at: float | None = None

    def __post_init__(self) -> None:
        if (self.execution is None) == (self.clarification is None):
            raise ValueError("a turn carries exactly one of execution or clarification")


class Runtime(Protocol):
    """What a session needs from its host to process turns."""

    dataset: Any

    def parse_utterance(self, session: "Session", utterance: str) -> ParseResult: ...
    def execute_ast(self, session: "Session", ast: QueryAst) -> ExecutionResult: ...
    def next_suggestion(self, session: "Session") -> Suggestion | None: ...
    def render_template(self, session: "Session", name: str, **values) -> str: ...
    def example_questions(self, session: "Session", n: int) -> list[str]: ...
    def embedding_backend(self): ...


class Session:
    def __init__(self, runtime: Runtime, seed: int, settings: SessionSettings | None = None,
                 session_id: str | None = None):
        self.id = session_id or uuid.uuid4().hex
        self.runtime = runtime
        self.seed = seed
        self.rng = random.Random(seed)
        self.settings = settings or SessionSettings()
        self.turns: list[Turn] = []
        self.suggestion_history: set[str] = set()
        self.pending_suggestion: Suggestion | None = None
        self.cache = PredictionCache()
        self.active_instance_ids: list[int] = []
        self.last_instance_id: int | None = None
        self.last_op: str | None = None
        self.lock = threading.Lock()

    def executed_ops(self) -> set[str]:
        ops: set[str] = set()
        for turn in self.turns:
            if turn.execution is not None and turn.parse_result is not None:
                ops.update(turn.parse_result.ast.op_names())
            elif turn.execution is not None and turn.parse_text:
                ops.update(parse_query(turn.parse_text).op_names())
        return ops


def _record_execution(session: Session, ast: QueryAst) -> None:
    op_names = ast.op_names()
    session.suggestion_history.update(op_names)
    if op_names:
        session.last_op = op_names[-1]
    if ast.filters:
        from ..data.ops import apply_filters

        scope = apply_filters(session.runtime.dataset, list(ast.filters), ast.connective)
        session.active_instance_ids = [i.id for i in scope]
        id_filters = [f.id for f in ast.filters if f.kind == "id" and f.id is not None]
        if id_filters:
            session.last_instance_id = id_filters[-1]


def _attach_suggestion(session: Session, turn: Turn) -> None:
    suggestion = session.runtime.next_suggestion(session)
    if suggestion is not None:
        session.suggestion_history.add(suggestion.op)
        session.pending_suggestion = suggestion
        turn.suggestion = suggestion


def _clarification_turn(session: Session, user_text: str, reason: str | None = None) -> Turn:
    examples = session.runtime.example_questions(session, 3)
    text = session.runtime.render_template(
        session, "clarification", examples="; ".join(f'"{e}"' for e in examples)
    )
    return Turn(
        index=len(session.turns),
        user_text=user_text,
        parse_text=None,
        response_text=text,
        clarification=text,
    )


def handle_turn(session: Session, user_text: str) -> Turn:
    """Process one user turn; never raises for unparseable input."""
    with session.lock:
        turn = _handle_turn_locked(session, user_text)
        turn.completed_at = time.time()
        session.turns.append(turn)
        return turn


def _handle_turn_locked(session: Session, user_text: str) -> Turn:
    runtime = session.runtime
    pending = session.pending_suggestion
    text_for_parsing = user_text

    if not user_text.strip():
        session.pending_suggestion = None
        return _clarification_turn(session, user_text)

    if pending is not None:
        decision = detect_confirmation(user_text, runtime.embedding_backend())
        session.pending_suggestion = None
        if decision == Decision.CONFIRM:
            ast = parse_query(pending.query)
            execution = runtime.execute_ast(session, ast)
            _record_execution(session, ast)
            turn = Turn(
                index=len(session.turns),
                user_text=user_text,
                parse_text=render_query(ast),
                response_text=execution.response_text,
                execution=execution,
            )
            _attach_suggestion(session, turn)
            return turn
        if decision == Decision.DECLINE:
            remainder = strip_decline_prefix(user_text)
            if not remainder:
                text = runtime.render_template(session, "acknowledge_decline")
                return Turn(
                    index=len(session.turns),
                    user_text=user_text,
                    parse_text=None,
                    response_text=text,
                    clarification=text,
                )
            text_for_parsing = remainder

    try:
        parse_result = runtime.parse_utterance(session, text_for_parsing)
    except Unparseable:
        return _clarification_turn(session, user_text)

    try:
        execution = runtime.execute_ast(session, parse_result.ast)
    except (ExecutorError, IdNotFound, NotFound) as exc:
        text = runtime.render_template(session, "error", message=str(exc))
        return Turn(
            index=len(session.turns),
            user_text=user_text,
            parse_text=render_query(parse_result.ast),
            response_text=text,
            parse_result=parse_result,
            clarification=text,
        )

    _record_execution(session, parse_result.ast)
    turn = Turn(
        index=len(session.turns),
        user_text=user_text,
        parse_text=render_query(parse_result.ast),
        response_text=execution.response_text,
        parse_result=parse_result,
        execution=execution,
    )
    _attach_suggestion(session, turn)
    return turn


def export_session(session: Session) -> dict[str, Any]:
    """Exportable dialogue history; stable field order, no timestamps."""
    return {
        "schema_version": EXPORT_SCHEMA_VERSION,
        "session_id": session.id,
        "settings": {**session.settings.to_dict(), "rng_seed": session.seed},
        "turns": [
            {
                "user_text": turn.user_text,
                "parse": turn.parse_text,
                "response_text": turn.response_text,
                "suggestion": (
                    {"op": turn.suggestion.op, "question": turn.suggestion.question}
                    if turn.suggestion is not None
                    else None
                ),
            }
            for turn in session.turns
        ],
    }


def export_json(session: Session) -> str:
    return json.dumps(export_session(session), indent=2, ensure_ascii=False)
