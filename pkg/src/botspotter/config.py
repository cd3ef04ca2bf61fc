"""Pipeline configuration: one YAML file, environment overrides for paths only."""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import yaml

from botspotter.domain import DEFAULT_WINDOW
from botspotter.ensemble.base import KINDS
from botspotter.errors import ConfigError
from botspotter.reports import REPORT_KINDS

ENV_PREFIX = "BOTSPOTTER_"
ANONYMIZE_MODES = ("none", "random", "keyed")
GRAPH_NODE_SETS = ("single", "accepted", "all")


@dataclass(frozen=True)
class Inputs:
    tweets: str | None = None
    users: str | None = None
    scores: str | None = None
    removed: str | None = None
    labels: str | None = None
    bags: str | None = None
    lexicon: str | None = None
    bundle: str | None = None


@dataclass(frozen=True)
class IngestSection:
    window: tuple[str, str] = DEFAULT_WINDOW
    anonymize: str = "random"
    key: str | None = None

    def __post_init__(self):
        if self.anonymize not in ANONYMIZE_MODES:
            raise ConfigError(f"ingest.anonymize must be one of {ANONYMIZE_MODES}")
        if self.anonymize == "keyed" and not self.key:
            raise ConfigError("ingest.anonymize = keyed needs ingest.key")
        if len(self.window) != 2:
            raise ConfigError("ingest.window must be [start, end]")


@dataclass(frozen=True)
class GateSection:
    pin: tuple[float, float] | None = None

    def __post_init__(self):
        if self.pin is not None and (len(self.pin) != 2 or not 0 <= self.pin[0] <= self.pin[1] <= 1):
            raise ConfigError("gate.pin must be [p75, p95] with 0 <= p75 <= p95 <= 1")


@dataclass(frozen=True)
class EnsembleSection:
    kinds: tuple[str, ...] = KINDS
    params: dict[str, dict] = field(default_factory=dict)
    cv_folds: int = 10
    delta: float | None = None

    def __post_init__(self):
        bad = [k for k in (*self.kinds, *self.params) if k not in KINDS]
        if bad:
            raise ConfigError(f"unknown classifier kinds {bad}; choose from {KINDS}")
        if not self.kinds:
            raise ConfigError("ensemble.kinds must list at least one classifier")
        if self.cv_folds == 1 or self.cv_folds < 0:
            raise ConfigError("ensemble.cv_folds must be 0 (skip) or >= 2")
        if self.delta is not None and not 0 <= self.delta < 1:
            raise ConfigError("ensemble.delta must lie in [0, 1)")


@dataclass(frozen=True)
class GraphSection:
    nodes: str = "single"
    giant_only: bool = True
    iterations: int = 100
    scaling: float = 2.0
    gravity: float = 1.0
    agreement_samples: int = 20

    def __post_init__(self):
        if self.nodes not in GRAPH_NODE_SETS:
            raise ConfigError(f"graph.nodes must be one of {GRAPH_NODE_SETS}")
        if self.iterations < 1 or self.scaling <= 0 or self.gravity < 0 or self.agreement_samples < 0:
            raise ConfigError("graph needs iterations >= 1, scaling > 0, gravity >= 0, agreement_samples >= 0")


@dataclass(frozen=True)
class ReportsSection:
    kinds: tuple[str, ...] = REPORT_KINDS
    daily_group_by: tuple[str, ...] = ("type", "class", "party")

    def __post_init__(self):
        bad = [k for k in self.kinds if k not in REPORT_KINDS]
        bad += [g for g in self.daily_group_by if g not in ("type", "class", "party")]
        if bad:
            raise ConfigError(f"unknown report settings {bad}")


@dataclass(frozen=True)
class Config:
    seed: int = 0
    inputs: Inputs = field(default_factory=Inputs)
    synthetic: dict[str, Any] | None = None
    ingest: IngestSection = field(default_factory=IngestSection)
    gate: GateSection = field(default_factory=GateSection)
    ensemble: EnsembleSection = field(default_factory=EnsembleSection)
    graph: GraphSection = field(default_factory=GraphSection)
    reports: ReportsSection = field(default_factory=ReportsSection)

    def to_dict(self) -> dict:
        return _plain(asdict(self))


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


_SECTIONS = {"inputs": Inputs, "ingest": IngestSection, "gate": GateSection,
             "ensemble": EnsembleSection, "graph": GraphSection, "reports": ReportsSection}
_TUPLES = {"window", "pin", "kinds", "daily_group_by"}


def _section(cls, data, name):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"config section {name!r} must be a mapping")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {unknown}")
    data = {k: tuple(v) if k in _TUPLES and isinstance(v, list) else v for k, v in data.items()}
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"bad {name!r} section: {exc}") from exc


def config_from_dict(data: dict, base_dir: str | Path | None = None) -> Config:
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    unknown = sorted(set(data) - {"seed", "synthetic", *_SECTIONS})
    if unknown:
        raise ConfigError(f"unknown config keys {unknown}")
    kw: dict[str, Any] = {name: _section(cls, data.get(name), name) for name, cls in _SECTIONS.items()}
    if "seed" in data:
        if not isinstance(data["seed"], int):
            raise ConfigError("seed must be an integer")
        kw["seed"] = data["seed"]
    syn = data.get("synthetic")
    if syn is not None and not isinstance(syn, dict):
        raise ConfigError("synthetic must be a mapping (scenario keys, or {scenario: FILE})")
    kw["synthetic"] = syn
    cfg = Config(**kw)
    if base_dir is not None:
        cfg = _resolve_paths(cfg, Path(base_dir))
    return cfg


def _resolve_paths(cfg: Config, base: Path) -> Config:
    def fix(p):
        return p if p is None or Path(p).is_absolute() else str((base / p).resolve())
    inputs = replace(cfg.inputs, **{f.name: fix(getattr(cfg.inputs, f.name)) for f in fields(Inputs)})
    syn = cfg.synthetic
    if syn is not None and isinstance(syn.get("scenario"), str):
        syn = {**syn, "scenario": fix(syn["scenario"])}
    return replace(cfg, inputs=inputs, synthetic=syn)


def apply_env(cfg: Config, environ: dict | None = None) -> Config:
    """BOTSPOTTER_TWEETS, BOTSPOTTER_USERS, ... replace the matching input paths."""
    environ = os.environ if environ is None else environ
    over = {f.name: environ[ENV_PREFIX + f.name.upper()]
            for f in fields(Inputs) if ENV_PREFIX + f.name.upper() in environ}
    return replace(cfg, inputs=replace(cfg.inputs, **over)) if over else cfg


def load_config(path: str | Path | None = None, environ: dict | None = None) -> Config:
    if path is None:
        return apply_env(Config(), environ)
    p = Path(path)
    try:
        data = yaml.safe_load(p.read_text(encoding="utf-8")) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {p} is not valid YAML: {exc}") from exc
    return apply_env(config_from_dict(data, p.parent), environ)
