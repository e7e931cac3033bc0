# settings.py: experiment configuration: pydantic models, loading, hashing

"""
Experiment configuration
------------------------
One YAML or JSON file describes a full scenario. Every key has a default,
so `{}` is a valid config (the no-Byzantine singleton capacity scenario).

Node ids and the chain's initial state are 1-based here, as written by
people; the builders in `scenario.py` convert them.
"""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from errors import ConfigError
from logger import get_logger

log = get_logger("BYZGRAD.Settings")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class FunctionConfig(_Section):
    kind: Literal["capacity", "linear", "quadratic"] = "capacity"
    C: float = 10.0
    c: list[float] | None = None
    Q: list[list[float]] | None = None
    x: list[float] | None = None


class UniverseConfig(_Section):
    mode: Literal["singletons", "all_nonempty_subsets", "custom", "random_subsets"] = "singletons"
    custom: list[list[int]] | None = None
    count: int | None = Field(None, ge=1)
    size: int | None = Field(None, ge=1)
    seed: int = 0


class ChainConfig(_Section):
    mode: Literal["iid_uniform", "custom"] = "iid_uniform"
    P: list[list[float]] | None = None
    seed: int | None = None
    initial_state: int = Field(1, ge=1)


class StrategyParams(_Section):
    M: float = 10.0
    sigma: float = Field(1.0, ge=0.0)
    s: float = 1.0
    report_offset: float = 0.0
    report_only: bool = False
    zero_floor: float = Field(1e-6, gt=0.0)


class ByzantineConfig(_Section):
    ids: list[int] = Field(default_factory=list)
    strategy: Literal["obedient", "constant_offset", "gaussian", "sign_flip_scaled"] = "constant_offset"
    params: StrategyParams = Field(default_factory=StrategyParams)


class PerturbConfig(_Section):
    delta: float = Field(0.01, gt=0.0)


class ScheduleConfig(_Section):
    a0: float = Field(1.0, gt=0.0)
    b0: float = Field(1.0, gt=0.0)
    alpha: float = 0.9
    beta: float = 0.6
    normalize: bool = True

    @model_validator(mode="after")
    def _two_timescales(self) -> "ScheduleConfig":
        if not 0.5 < self.beta < self.alpha <= 1.0:
            raise ValueError(f"need 0.5 < beta < alpha <= 1, got alpha={self.alpha}, beta={self.beta}")
        return self


class RunConfig(_Section):
    iterations: int = Field(200_000, ge=0)
    metrics_stride: int = Field(1000, ge=1)
    replications: int = Field(10, ge=1)
    visited_only: bool = False
    freeze_v: bool = False
    stacked_estimate: bool = False


class OutputConfig(_Section):
    dir: str = "runs"


class ExperimentConfig(_Section):
    name: str = "experiment"
    nodes: int = Field(6, ge=1)
    function: FunctionConfig = Field(default_factory=FunctionConfig)
    universe: UniverseConfig = Field(default_factory=UniverseConfig)
    chain: ChainConfig = Field(default_factory=ChainConfig)
    byzantine: ByzantineConfig = Field(default_factory=ByzantineConfig)
    perturb: PerturbConfig = Field(default_factory=PerturbConfig)
    schedule: ScheduleConfig = Field(default_factory=ScheduleConfig)
    run: RunConfig = Field(default_factory=RunConfig)
    seed: int = 0
    output: OutputConfig = Field(default_factory=OutputConfig)


# ---------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------
def _key_path(error: dict) -> str:
    return ".".join(str(part) for part in error["loc"])


def _cross_check(config: ExperimentConfig) -> None:
    """Checks spanning several sections; each failure names the key to fix."""
    n = config.nodes
    fn = config.function

    if fn.x is not None and len(fn.x) != n:
        raise ConfigError("function.x", f"expected {n} entries, got {len(fn.x)}")
    if fn.kind == "linear" and (fn.c is None or len(fn.c) != n):
        raise ConfigError("function.c", f"linear function needs c with {n} entries")
    if fn.kind == "quadratic":
        if fn.Q is None or len(fn.Q) != n or any(len(row) != n for row in fn.Q):
            raise ConfigError("function.Q", f"quadratic function needs a {n}×{n} matrix Q")
        if fn.c is not None and len(fn.c) != n:
            raise ConfigError("function.c", f"expected {n} entries, got {len(fn.c)}")

    stray = [i for i in config.byzantine.ids if not 1 <= i <= n]
    if stray:
        raise ConfigError("byzantine.ids", f"ids must lie in 1..{n}, got {stray}")
    if len(set(config.byzantine.ids)) != len(config.byzantine.ids):
        raise ConfigError("byzantine.ids", "duplicate node ids")

    uni = config.universe
    if uni.mode == "custom" and not uni.custom:
        raise ConfigError("universe.custom", "custom universe needs a non-empty list of vectors")
    if uni.mode == "random_subsets" and (uni.count is None or uni.size is None):
        raise ConfigError("universe", "random_subsets needs both count and size")
    if uni.size is not None and uni.size > n:
        raise ConfigError("universe.size", f"subset size must be <= {n}, got {uni.size}")

    if config.chain.mode == "custom" and config.chain.P is None:
        raise ConfigError("chain.P", "custom chain needs a transition matrix")


def parse_config(data: Any) -> ExperimentConfig:
    """Validate an already-parsed mapping."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("", f"config must be a mapping, got {type(data).__name__}")
    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        path = _key_path(first)
        log.warning("config_rejected", key_path=path, reason=first["msg"])
        raise ConfigError(path, first["msg"]) from None
    _cross_check(config)
    return config


def load_config(path: str | Path) -> ExperimentConfig:
    """
    Read a YAML or JSON config file (JSON is a YAML subset).

    Raises:
        ConfigError: missing or unreadable file, bad syntax, or an invalid key
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError("", f"config file not found: {path}") from None
    except OSError as exc:
        raise ConfigError("", f"cannot read config file {path}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("", f"cannot parse {path}: {exc}") from None
    return parse_config(data)


def with_override(config: ExperimentConfig, key_path: str, value: Any) -> ExperimentConfig:
    """Copy of `config` with one dotted key replaced, re-validated."""
    data = config.model_dump(mode="json")
    node = data
    parts = key_path.split(".")
    for part in parts[:-1]:
        if not isinstance(node.get(part), dict):
            raise ConfigError(key_path, "not a config section")
        node = node[part]
    if parts[-1] not in node:
        raise ConfigError(key_path, "unknown config key")
    node[parts[-1]] = copy.deepcopy(value)
    return parse_config(data)


def config_hash(config: ExperimentConfig) -> str:
    """sha256 of the canonical JSON dump, output location excluded."""
    canonical = json.dumps(
        config.model_dump(mode="json", exclude={"output"}),
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
