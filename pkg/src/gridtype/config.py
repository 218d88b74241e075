"""Run configuration: YAML file schema, defaults and validation.

The configuration file is the source of truth for experiments; command-line
flags only override selected fields.  Every section is optional and falls
back to the documented defaults, so a minimal config can be just a seed.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .epoch import EpochConfig, MODELS
from .graph import DEFAULT_LABELS, MODES, NavGraph, build_grid_graph
from .harness import DEFAULT_PROFILE_TARGETS
from .lm import NgramModel, load_model, train_ngram, train_ngram_file
from .session import DEFAULT_WORDS


class ConfigError(Exception):
    """Invalid or unreadable run configuration."""


@dataclass
class GraphConfig:
    rows: int = 5
    cols: int = 7
    labels: str = DEFAULT_LABELS
    wrap: bool = True

    def build(self) -> NavGraph:
        try:
            return build_grid_graph(self.rows, self.cols, self.labels, self.wrap)
        except ValueError as exc:
            raise ConfigError(f"graph: {exc}") from exc


@dataclass
class LmConfig:
    model_path: str | None = None
    corpus_path: str | None = None  # None -> the packaged corpus snippet
    order: int = 6
    alpha: float = 0.1

    def build(self, labels) -> NgramModel:
        try:
            if self.model_path:
                return load_model(self.model_path)
            if self.corpus_path:
                return train_ngram_file(self.corpus_path, self.order, self.alpha, labels)
            text = packaged_corpus()
            return train_ngram(text, self.order, self.alpha, labels)
        except OSError as exc:
            raise ConfigError(f"lm: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"lm: {exc}") from exc


@dataclass
class ProfilesConfig:
    targets: tuple[float, ...] = DEFAULT_PROFILE_TARGETS
    sigma: float = 1.0
    calibration_seed: int = 1234
    calibration_draws: int = 50_000


@dataclass
class GridConfig:
    models: tuple[str, ...] = MODELS
    criteria: tuple[str, ...] = MODES
    runs: int = 30


@dataclass
class SessionConfig:
    words: tuple[str, ...] = DEFAULT_WORDS
    start_label: str | None = None  # None -> centre key


@dataclass
class ExperimentConfig:
    words: tuple[str, ...] = DEFAULT_WORDS[:2]
    strength: float = 0.5
    criteria: tuple[str, ...] = ("psc",)
    models: tuple[str, ...] = ("joint", "marginal")


@dataclass
class OutputConfig:
    dir: str = "out"
    figures: bool = True


@dataclass
class ServiceConfig:
    prior: str = "uniform"  # "uniform" or "lm"


@dataclass
class RunConfig:
    graph: GraphConfig = field(default_factory=GraphConfig)
    lm: LmConfig = field(default_factory=LmConfig)
    profiles: ProfilesConfig = field(default_factory=ProfilesConfig)
    epoch: EpochConfig = field(default_factory=EpochConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    session: SessionConfig = field(default_factory=SessionConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    service: ServiceConfig = field(default_factory=ServiceConfig)
    seed: int = 20240501

    def start_cursor(self, graph: NavGraph) -> int:
        if self.session.start_label is None:
            return graph.node_index(graph.rows // 2, graph.cols // 2)
        try:
            return graph.node_of_label(self.session.start_label)
        except KeyError as exc:
            raise ConfigError(f"session.start_label: {exc}") from exc


def packaged_corpus() -> str:
    return (
        importlib.resources.files("gridtype") / "data" / "corpus.txt"
    ).read_text(encoding="utf-8")


def _take(section: dict, cls, name: str, **renames):
    if section is None:
        section = {}
    if not isinstance(section, dict):
        raise ConfigError(f"{name}: expected a mapping, got {type(section).__name__}")
    fields = {f for f in cls.__dataclass_fields__}
    kwargs = {}
    for key, value in section.items():
        key = renames.get(key, key)
        if key not in fields:
            raise ConfigError(f"{name}: unknown key {key!r}")
        if isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def parse_config(data: dict) -> RunConfig:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    known = {"graph", "lm", "profiles", "epoch", "grid", "session",
             "experiment", "output", "service", "seed"}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown config section {key!r}")
    cfg = RunConfig(
        graph=_take(data.get("graph"), GraphConfig, "graph"),
        lm=_take(data.get("lm"), LmConfig, "lm", model="model_path", corpus="corpus_path"),
        profiles=_take(data.get("profiles"), ProfilesConfig, "profiles"),
        epoch=_take(data.get("epoch"), EpochConfig, "epoch",
                    theta="confidence_threshold"),
        grid=_take(data.get("grid"), GridConfig, "grid"),
        session=_take(data.get("session"), SessionConfig, "session"),
        experiment=_take(data.get("experiment"), ExperimentConfig, "experiment"),
        output=_take(data.get("output"), OutputConfig, "output"),
        service=_take(data.get("service"), ServiceConfig, "service"),
        seed=int(data.get("seed", RunConfig.seed)),
    )
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    for m in cfg.grid.models:
        if m not in MODELS:
            raise ConfigError(f"grid.models: unknown model {m!r}")
    for c in cfg.grid.criteria:
        if c not in MODES:
            raise ConfigError(f"grid.criteria: unknown criterion {c!r}")
    for c in cfg.experiment.criteria:
        if c not in MODES:
            raise ConfigError(f"experiment.criteria: unknown criterion {c!r}")
    if cfg.grid.runs < 1:
        raise ConfigError("grid.runs must be >= 1")
    if not cfg.profiles.targets:
        raise ConfigError("profiles.targets must not be empty")
    for t in cfg.profiles.targets:
        if not 0.0 < t <= 1.0:
            raise ConfigError(f"profiles.targets: {t} outside (0, 1]")
    if not 0.0 <= cfg.experiment.strength < 1.0:
        raise ConfigError("experiment.strength must be in [0, 1)")
    if len(cfg.experiment.words) != 2:
        raise ConfigError("experiment.words must list exactly two words")
    if cfg.service.prior not in ("uniform", "lm"):
        raise ConfigError(f"service.prior: unknown prior {cfg.service.prior!r}")


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(data)
