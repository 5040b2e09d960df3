"""Dialogue: sessions, turn handling, suggestions, confirmation, export."""

from .session import (
    EXPORT_SCHEMA_VERSION,
    Runtime,
    Session,
    SessionSettings,
    Turn,
    export_json,
    export_session,
    handle_turn,
)
from .suggest import (
    CATEGORY_RING,
    CONFIRM_TEMPLATES,
    CONFIRMATION_THRESHOLD,
    DECLINE_TEMPLATES,
    Decision,
    Suggestion,
    SuggestionRule,
    detect_confirmation,
    strip_decline_prefix,
)

__all__ = [
    "CATEGORY_RING",
    "CONFIRMATION_THRESHOLD",
    "CONFIRM_TEMPLATES",
    "DECLINE_TEMPLATES",
    "Decision",
    "EXPORT_SCHEMA_VERSION",
    "Runtime",
    "Session",
    "SessionSettings",
    "Suggestion",
    "SuggestionRule",
    "Turn",
    "detect_confirmation",
    "export_json",
    "export_session",
    "handle_turn",
    "strip_decline_prefix",
]
