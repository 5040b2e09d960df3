"""Pluggable external-information search provider.

Live web search is out of scope for v1; only the provider interface is
fixed, and the default implementation is a stub that reports search as
disabled. Deployments can plug any provider implementing the protocol.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

SEARCH_DISABLED_NOTICE = "External search is disabled in this deployment."


@dataclass(frozen=True)
class SearchResult:
    title: str
    url: str
    snippet: str = ""


@runtime_checkable
class SearchProvider(Protocol):
    enabled: bool

    def search(self, query: str, limit: int = 3) -> list[SearchResult]: ...


class DisabledSearchProvider:
    """The shipped stub: always enabled=False, returns the fixed notice."""

    enabled = False

    def search(self, query: str, limit: int = 3) -> list[SearchResult]:
        return [SearchResult(title="search disabled", url="", snippet=SEARCH_DISABLED_NOTICE)]
