"""Response templates: editable text files, one per operation.

A template file holds one or more surface variants separated by a line
containing only ``---``; a seeded RNG picks among them so responses vary
naturally but deterministically. Unknown placeholders render as empty
strings, so templates never throw on sparse payloads.
"""

from __future__ import annotations

import random
from pathlib import Path


class _SafeDict(dict):
    def __missing__(self, key: str) -> str:
        return ""


class TemplateLibrary:
    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self._cache: dict[str, list[str]] = {}

    def variants(self, name: str) -> list[str]:
        if name not in self._cache:
            path = self.directory / f"{name}.txt"
            if not path.exists():
                raise FileNotFoundError(f"no response template {path}")
            raw = path.read_text(encoding="utf-8")
            chunks = [c.strip() for c in raw.split("\n---\n")]
            self._cache[name] = [c for c in chunks if c]
        return self._cache[name]

    def render(self, name: str, rng: random.Random | None = None, **values) -> str:
        variants = self.variants(name)
        if rng is not None and len(variants) > 1:
            template = variants[rng.randrange(len(variants))]
        else:
            template = variants[0]
        return template.format_map(_SafeDict(values))
