"""Experiment configuration: a flat YAML mapping with a fixed key set."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml

from ..errors import ConfigError

OBJECTIVES = ("facility-location", "concave-over-modular", "coverage-file", "stationary-trap", "frank-wolfe-trap")
CONSTRAINTS = ("cardinality", "simplex", "box")
SOLVERS = ("sg", "sm", "fw", "greedy")
SCHEDULES = ("inverse-sqrt", "theoretical", "constant")
OUTPUT_RULES = ("uniform", "endpoint", "last")
STARTS = ("center", "zero", "argmin", "x_loc")


@dataclass
class ExperimentConfig:
    objective: str
    solver: list[str]
    k: list[int]
    T: list[int] = field(default_factory=lambda: [2000])
    B: int = 1
    greedy_B: int | None = None
    constraint: str = "cardinality"
    power: float = 0.5
    trap_k: int = 2
    trap_n: int = 11
    ratings: str | None = None
    ratings_format: str = "movielens-1m"
    coverage_file: str | None = None
    synthetic_users: int = 500
    synthetic_items: int = 200
    synthetic_density: float = 0.1
    synthetic_r_max: int = 5
    synthetic_seed: int = 0
    schedule: str = "inverse-sqrt"
    c: float = 1.0
    c_sm: float | None = None
    mu: float | None = None
    L: float | None = None
    sigma: float | None = None
    R: float | None = None
    exact: bool = False
    start: str = "center"
    output_rule: str = "uniform"
    t_checkpoints: list[int] | None = None
    value_samples: int = 1000
    seed: int = 0
    output: str | None = None
    workers: int = 1
    timing: bool = True
    config_id: str | None = None
    base_dir: str = field(default=".", repr=False)

    def resolve(self, path: str | None) -> Path | None:
        if path is None:
            return None
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def batch_for(self, solver: str) -> int:
        if solver == "greedy" and self.greedy_B is not None:
            return self.greedy_B
        return self.B

    def c_for(self, solver: str) -> float:
        if solver == "sm" and self.c_sm is not None:
            return self.c_sm
        return self.c

    def sweep(self) -> list[tuple[str, int, int]]:
        """Sweep points ``(solver, k, T)`` in deterministic order."""
        return [(s, k, T) for s in self.solver for k in self.k for T in self.T]


_LIST_KEYS = {"solver", "k", "T", "t_checkpoints"}
_KNOWN = {f.name for f in fields(ExperimentConfig)} - {"base_dir"}


def _as_list(key, value):
    if value is None:
        return None
    return list(value) if isinstance(value, (list, tuple)) else [value]


def parse_config(data: dict[str, Any], base_dir: str = ".", default_id: str = "run") -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a flat key-value mapping")
    unknown = sorted(set(data) - _KNOWN)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for key, value in data.items():
        if isinstance(value, dict):
            raise ConfigError(f"config must be flat; key {key!r} holds a mapping")
    for req in ("objective", "solver"):
        if req not in data:
            raise ConfigError(f"missing required key {req!r}")
    values = dict(data)
    for key in _LIST_KEYS:
        if key in values:
            values[key] = _as_list(key, values[key])
    if "k" not in values:
        if data["objective"] == "stationary-trap":
            values["k"] = [int(values.get("trap_k", 2))]
        elif data["objective"] == "frank-wolfe-trap":
            values["k"] = [1]
        else:
            raise ConfigError("missing required key 'k'")
    try:
        cfg = ExperimentConfig(**values, base_dir=base_dir)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.config_id is None:
        cfg.config_id = default_id
    validate_config(cfg)
    return cfg


def _choice(name, value, allowed):
    if value not in allowed:
        raise ConfigError(f"{name}={value!r}; expected one of {allowed}")


def validate_config(cfg: ExperimentConfig, check_files: bool = True) -> None:
    _choice("objective", cfg.objective, OBJECTIVES)
    _choice("constraint", cfg.constraint, CONSTRAINTS)
    _choice("schedule", cfg.schedule, SCHEDULES)
    _choice("output_rule", cfg.output_rule, OUTPUT_RULES)
    _choice("start", cfg.start, STARTS)
    for s in cfg.solver:
        _choice("solver", s, SOLVERS)
    if any(not isinstance(k, int) or k < 0 for k in cfg.k):
        raise ConfigError("k values must be non-negative integers")
    if any(not isinstance(t, int) or t < 1 for t in cfg.T):
        raise ConfigError("T values must be positive integers")
    if cfg.B < 1 or (cfg.greedy_B is not None and cfg.greedy_B < 1):
        raise ConfigError("batch sizes must be at least 1")
    if cfg.objective == "concave-over-modular" and not 0 < cfg.power <= 1:
        raise ConfigError("power must lie in (0, 1]")
    if cfg.t_checkpoints is not None and any(t < 1 for t in cfg.t_checkpoints):
        raise ConfigError("t_checkpoints must be positive")
    if cfg.schedule == "constant" and cfg.mu is None:
        raise ConfigError("constant schedule needs mu")
    if cfg.start == "x_loc" and cfg.objective != "stationary-trap":
        raise ConfigError("start=x_loc only applies to the stationary-trap objective")
    if cfg.workers < 1:
        raise ConfigError("workers must be at least 1")
    if cfg.objective == "coverage-file" and cfg.coverage_file is None:
        raise ConfigError("objective coverage-file needs coverage_file")
    if check_files:
        for key in ("ratings", "coverage_file"):
            p = cfg.resolve(getattr(cfg, key))
            if p is not None and not p.is_file():
                raise ConfigError(f"{key} file does not exist: {p}")


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    return parse_config(data or {}, base_dir=str(path.parent), default_id=path.stem)


def derive_seed(seed: int, index: int) -> int:
    """Stable 63-bit seed for sweep point ``index`` of a run seeded with ``seed``."""
    digest = hashlib.sha256(f"{seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1
