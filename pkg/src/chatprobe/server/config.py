"""Application configuration: a TOML file with documented keys.

Every key is optional; defaults give a fully offline setup (mock generation,
mock embedding, no attribution) over the packaged fact-checking fixture.
Backend URLs may be overridden with the environment variables
CHATPROBE_GENERATION_URL, CHATPROBE_EMBEDDING_URL, CHATPROBE_ATTRIBUTION_URL.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..backends.http import HttpAttributionBackend, HttpEmbeddingBackend, HttpGenerationBackend
from ..backends.mock import MockAttributionBackend, MockEmbeddingBackend, MockGenerationBackend
from ..backends.protocol import BackendConfig, BackendSuite
from ..data.store import Dataset, load_dataset
from ..dialogue.session import SessionSettings
from ..parsing.engine import StrategyProfile
from ..workbench import Workbench, default_resource_dir

PACKAGED_DATASETS = ("covid_fact_mini", "ecqa_mini")


class ConfigError(Exception):
    pass


@dataclass
class AppConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    frontend_dir: str | None = None
    snapshot_dir: str | None = None

    generation_url: str | None = None
    embedding_url: str | None = None
    attribution_url: str | None = None
    supports_grammar: bool = True
    timeout_s: float = 120.0
    retries: int = 1
    mock_generation_script: str | None = None
    use_mock_embedding: bool = True
    use_mock_attribution: bool = False

    dataset_path: str = "covid_fact_mini"
    dataset_name: str | None = None
    dataset_description: str = ""

    resource_dir: str | None = None
    parsing_strategy: str = "mp"
    max_new_tokens: int = 10
    small_model: bool = False
    verify_cfe_flip: bool = True

    seed: int = 13
    expertise: str = "intermediate"
    cot_strategy: str = "zero_cot"

    metadata: dict[str, str] = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | Path | None = None) -> "AppConfig":
        config = cls()
        if path is not None:
            path = Path(path)
            if not path.exists():
                raise ConfigError(f"config file {path} does not exist")
            with path.open("rb") as handle:
                doc = tomllib.load(handle)
            config._apply(doc, base_dir=path.parent)
        config._apply_env()
        return config

    def _apply(self, doc: dict, base_dir: Path) -> None:
        def resolve(value: str | None) -> str | None:
            if value is None or value == "":
                return None
            p = Path(value)
            if not p.is_absolute() and (base_dir / p).exists():
                return str(base_dir / p)
            return value

        server = doc.get("server", {})
        self.host = server.get("host", self.host)
        self.port = int(server.get("port", self.port))
        self.frontend_dir = resolve(server.get("frontend_dir")) or self.frontend_dir
        self.snapshot_dir = resolve(server.get("snapshot_dir")) or self.snapshot_dir

        backends = doc.get("backends", {})
        self.generation_url = backends.get("generation_url") or self.generation_url
        self.embedding_url = backends.get("embedding_url") or self.embedding_url
        self.attribution_url = backends.get("attribution_url") or self.attribution_url
        self.supports_grammar = bool(backends.get("supports_grammar", self.supports_grammar))
        self.timeout_s = float(backends.get("timeout_s", self.timeout_s))
        self.retries = int(backends.get("retries", self.retries))
        mock = backends.get("mock", {})
        self.mock_generation_script = resolve(mock.get("generation_script")) or self.mock_generation_script
        self.use_mock_embedding = bool(mock.get("use_mock_embedding", self.use_mock_embedding))
        self.use_mock_attribution = bool(mock.get("use_mock_attribution", self.use_mock_attribution))

        dataset = doc.get("dataset", {})
        self.dataset_path = resolve(dataset.get("path")) or self.dataset_path
        self.dataset_name = dataset.get("name") or self.dataset_name
        self.dataset_description = dataset.get("description", self.dataset_description)

        parsing = doc.get("parsing", {})
        self.resource_dir = resolve(doc.get("resources", {}).get("dir")) or self.resource_dir
        self.parsing_strategy = parsing.get("strategy", self.parsing_strategy)
        self.max_new_tokens = int(parsing.get("max_new_tokens", self.max_new_tokens))
        self.small_model = bool(parsing.get("small_model", self.small_model))

        executor = doc.get("executor", {})
        self.verify_cfe_flip = bool(executor.get("verify_cfe_flip", self.verify_cfe_flip))

        session = doc.get("session", {})
        self.seed = int(session.get("seed", self.seed))
        self.expertise = session.get("expertise", self.expertise)
        self.cot_strategy = session.get("cot_strategy", self.cot_strategy)

        self.metadata.update({str(k): str(v) for k, v in doc.get("metadata", {}).items()})

    def _apply_env(self) -> None:
        self.generation_url = os.environ.get("CHATPROBE_GENERATION_URL", self.generation_url) or None
        self.embedding_url = os.environ.get("CHATPROBE_EMBEDDING_URL", self.embedding_url) or None
        self.attribution_url = os.environ.get("CHATPROBE_ATTRIBUTION_URL", self.attribution_url) or None


def _load_mock_script(path: str | None) -> list[tuple[str, str]]:
    if not path:
        return []
    script_path = Path(path)
    if not script_path.exists():
        raise ConfigError(f"mock generation script {script_path} does not exist")
    entries = []
    for line in script_path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            row = json.loads(line)
            entries.append((row["pattern"], row["completion"]))
    return entries


def build_backends(config: AppConfig) -> BackendSuite:
    backend_config = BackendConfig(
        generation_url=config.generation_url,
        embedding_url=config.embedding_url,
        attribution_url=config.attribution_url,
        timeout_s=config.timeout_s,
        retries=config.retries,
        supports_grammar=config.supports_grammar,
    )
    if config.generation_url:
        generation = HttpGenerationBackend(config.generation_url, backend_config)
    else:
        generation = MockGenerationBackend(
            _load_mock_script(config.mock_generation_script),
            supports_grammar=config.supports_grammar,
        )
    if config.embedding_url:
        embedding = HttpEmbeddingBackend(config.embedding_url, backend_config)
    elif config.use_mock_embedding:
        embedding = MockEmbeddingBackend()
    else:
        embedding = None
    if config.attribution_url:
        attribution = HttpAttributionBackend(config.attribution_url, backend_config)
    elif config.use_mock_attribution:
        attribution = MockAttributionBackend()
    else:
        attribution = None
    return BackendSuite(generation=generation, embedding=embedding, attribution=attribution)


def load_active_dataset(config: AppConfig) -> Dataset:
    path = config.dataset_path
    if path in PACKAGED_DATASETS:
        file_path = default_resource_dir() / "datasets" / f"{path}.jsonl"
    else:
        file_path = Path(path)
    if not file_path.exists():
        raise ConfigError(f"dataset file {file_path} does not exist")
    return load_dataset(file_path, name=config.dataset_name, metadata=config.dataset_description)


def build_workbench(config: AppConfig) -> Workbench:
    dataset = load_active_dataset(config)
    backends = build_backends(config)
    settings = SessionSettings(
        expertise=config.expertise,
        cot_strategy=config.cot_strategy,
        parsing_strategy=config.parsing_strategy,
    )
    return Workbench(
        dataset=dataset,
        backends=backends,
        resource_dir=config.resource_dir,
        metadata=config.metadata,
        profile=StrategyProfile(small_model=config.small_model),
        default_settings=settings,
        max_new_tokens=config.max_new_tokens,
        verify_cfe_flip=config.verify_cfe_flip,
        seed=config.seed,
    )
