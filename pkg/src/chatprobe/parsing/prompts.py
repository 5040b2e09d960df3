"""Prompt store: few-shot pools and templates used by the parsing strategies.

Templates are plain-text files in a prompt directory:

    gd_prompt.txt          guided-decoding template; placeholders
                           {demonstrations} and {utterance}
    gd_pool.jsonl          demonstration pool, one {"utterance", "parse"} per line
    mp_stage1.txt          stage-1 template; placeholders {operations_list},
                           {demonstrations} and {utterance}
    mp_stage1_demos.jsonl  stage-1 demos, one {"utterance", "operation"} per line
    mp_stage2/<op>.txt     per-operation stage-2 template with 2-7 inline
                           demonstrations and a trailing {utterance} slot

Demonstrations inside stage-2 templates are written as

    User question: <utterance>
    Parse: <canonical query>

pairs; the loader parses them back out to check that every parse round-trips
through the query language.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..catalog.ops import Catalog
from ..catalog.parser import canonicalize

DEMO_UTTERANCE_PREFIX = "User question: "
DEMO_PARSE_PREFIX = "Parse: "
MIN_GD_POOL = 20
STAGE2_DEMO_RANGE = (2, 7)


class PromptStoreError(Exception):
    pass


@dataclass(frozen=True)
class Demonstration:
    utterance: str
    parse: str


def op_slug(name: str) -> str:
    return name.replace(" ", "_")


def render_demonstrations(demos: list[Demonstration]) -> str:
    return "\n\n".join(
        f"{DEMO_UTTERANCE_PREFIX}{d.utterance}\n{DEMO_PARSE_PREFIX}{d.parse}" for d in demos
    )


def _extract_inline_demos(template: str) -> list[Demonstration]:
    demos: list[Demonstration] = []
    lines = template.splitlines()
    for i, line in enumerate(lines):
        if not line.startswith(DEMO_UTTERANCE_PREFIX):
            continue
        utterance = line[len(DEMO_UTTERANCE_PREFIX):].strip()
        if "{utterance}" in utterance:
            continue
        if i + 1 < len(lines) and lines[i + 1].startswith(DEMO_PARSE_PREFIX):
            parse = lines[i + 1][len(DEMO_PARSE_PREFIX):].strip()
            if parse:
                demos.append(Demonstration(utterance=utterance, parse=parse))
    return demos


@dataclass
class PromptStore:
    gd_pool: list[Demonstration]
    gd_template: str
    mp_stage1_template: str
    mp_stage1_demos: list[tuple[str, str]]
    mp_stage2: dict[str, str]
    overrides: dict[str, str] = field(default_factory=dict)

    @classmethod
    def load(cls, directory: str | Path) -> "PromptStore":
        directory = Path(directory)

        def read(name: str) -> str:
            path = directory / name
            if not path.exists():
                raise PromptStoreError(f"missing prompt file {path}")
            return path.read_text(encoding="utf-8")

        pool = []
        for line in read("gd_pool.jsonl").splitlines():
            line = line.strip()
            if line:
                row = json.loads(line)
                pool.append(Demonstration(utterance=row["utterance"], parse=row["parse"]))

        stage1_demos = []
        for line in read("mp_stage1_demos.jsonl").splitlines():
            line = line.strip()
            if line:
                row = json.loads(line)
                stage1_demos.append((row["utterance"], row["operation"]))

        stage2: dict[str, str] = {}
        stage2_dir = directory / "mp_stage2"
        if not stage2_dir.is_dir():
            raise PromptStoreError(f"missing stage-2 template directory {stage2_dir}")
        for path in sorted(stage2_dir.glob("*.txt")):
            stage2[path.stem.replace("_", " ")] = path.read_text(encoding="utf-8")

        return cls(
            gd_pool=pool,
            gd_template=read("gd_prompt.txt"),
            mp_stage1_template=read("mp_stage1.txt"),
            mp_stage1_demos=stage1_demos,
            mp_stage2=stage2,
        )

    def with_overrides(self, overrides: dict[str, str]) -> "PromptStore":
        """Session-scoped prompt overrides; keys: gd_prompt, mp_stage1, mp_stage2/<op-slug>."""
        merged = dict(self.overrides)
        merged.update(overrides or {})
        return PromptStore(
            gd_pool=self.gd_pool,
            gd_template=self.gd_template,
            mp_stage1_template=self.mp_stage1_template,
            mp_stage1_demos=self.mp_stage1_demos,
            mp_stage2=self.mp_stage2,
            overrides=merged,
        )

    def gd_prompt_template(self) -> str:
        return self.overrides.get("gd_prompt", self.gd_template)

    def stage1_template(self) -> str:
        return self.overrides.get("mp_stage1", self.mp_stage1_template)

    def stage2_template(self, op: str) -> str:
        override = self.overrides.get(f"mp_stage2/{op_slug(op)}")
        if override is not None:
            return override
        try:
            return self.mp_stage2[op]
        except KeyError:
            raise PromptStoreError(f"no stage-2 template for operation {op!r}") from None

    def stage2_demos(self, op: str) -> list[Demonstration]:
        return _extract_inline_demos(self.stage2_template(op))

    def check(self, catalog: Catalog) -> None:
        """Enforce pool sizing, template coverage, and demo round-trips."""
        if len(self.gd_pool) < MIN_GD_POOL:
            raise PromptStoreError(
                f"demonstration pool has {len(self.gd_pool)} entries; need >= {MIN_GD_POOL}"
            )
        for demo in self.gd_pool:
            if canonicalize(demo.parse, catalog) != demo.parse:
                raise PromptStoreError(f"pool parse is not canonical: {demo.parse!r}")
        lo, hi = STAGE2_DEMO_RANGE
        for op in catalog.operations():
            if op.name not in self.mp_stage2:
                raise PromptStoreError(f"operation {op.name!r} has no stage-2 template")
            demos = self.stage2_demos(op.name)
            if not lo <= len(demos) <= hi:
                raise PromptStoreError(
                    f"stage-2 template for {op.name!r} has {len(demos)} demonstrations; "
                    f"need {lo}-{hi}"
                )
            for demo in demos:
                if canonicalize(demo.parse, catalog) != demo.parse:
                    raise PromptStoreError(
                        f"stage-2 demo parse for {op.name!r} is not canonical: {demo.parse!r}"
                    )
        for placeholder in ("{demonstrations}", "{utterance}"):
            if placeholder not in self.gd_prompt_template():
                raise PromptStoreError(f"gd template lacks {placeholder}")
        for placeholder in ("{operations_list}", "{utterance}"):
            if placeholder not in self.stage1_template():
                raise PromptStoreError(f"stage-1 template lacks {placeholder}")
