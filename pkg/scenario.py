# scenario.py: turn a validated config into the objects a run needs

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from decode import StackedSystem, build_A1
from errors import ChainError, ConfigError, DomainError, UniverseError
from model import ActivationUniverse, NodePartition, build_universe, byzantine_blocks
from oracle import BlackBoxFunction, GradientFactorization, analytic_gradient, evaluate, factorize
from perturb import ByzantineStrategy, make_strategy
from activation import validate_transition_matrix
from settings import ExperimentConfig


@dataclass(frozen=True, eq=False)
class Scenario:
    config: ExperimentConfig
    f: BlackBoxFunction
    factorization: GradientFactorization
    x: np.ndarray
    universe: ActivationUniverse
    system: StackedSystem
    partition: NodePartition
    strategies: dict[int, ByzantineStrategy]
    byzantine_blocks: frozenset[int]
    P: np.ndarray | None

    @property
    def n(self) -> int:
        return self.partition.n

    @property
    def true_gradient(self) -> np.ndarray:
        return analytic_gradient(self.f, self.x)


def build_function(config: ExperimentConfig) -> BlackBoxFunction:
    fn = config.function
    try:
        if fn.kind == "capacity":
            return BlackBoxFunction.capacity(fn.C, config.nodes)
        if fn.kind == "linear":
            return BlackBoxFunction.linear(fn.c)
        return BlackBoxFunction.quadratic(fn.Q, fn.c)
    except ValueError as exc:
        raise ConfigError("function", str(exc)) from None


def build_strategies(config: ExperimentConfig) -> dict[int, ByzantineStrategy]:
    """One strategy object per Byzantine node, keyed by 0-based index."""
    byz = config.byzantine
    params = byz.params.model_dump()
    kind_params = {"constant_offset": ("M",), "gaussian": ("sigma",), "sign_flip_scaled": ("s",)}
    shared = {k: params[k] for k in ("report_offset", "report_only", "zero_floor")}
    own = {k: params[k] for k in kind_params.get(byz.strategy, ())}
    return {i - 1: make_strategy(byz.strategy, **own, **shared) for i in byz.ids}


def build_scenario(config: ExperimentConfig) -> Scenario:
    """
    Raises:
        ConfigError: the config is well-formed but describes an impossible
            scenario (pole at x, reducible chain, malformed universe)
    """
    n = config.nodes
    f = build_function(config)
    x = np.ones(n) if config.function.x is None else np.asarray(config.function.x, dtype=float)
    try:
        evaluate(f, x)
    except DomainError as exc:
        raise ConfigError("function.x", str(exc)) from None

    uni = config.universe
    try:
        universe = build_universe(uni.mode, n, custom=uni.custom, count=uni.count, size=uni.size, seed=uni.seed)
    except UniverseError as exc:
        raise ConfigError("universe", str(exc)) from None

    P = None
    if config.chain.mode == "custom":
        try:
            P = validate_transition_matrix(config.chain.P)
        except ChainError as exc:
            raise ConfigError("chain.P", str(exc)) from None
        if P.shape[0] != len(universe):
            raise ConfigError("chain.P", f"P has {P.shape[0]} states but the universe has {len(universe)}")
    if config.chain.initial_state > len(universe):
        raise ConfigError("chain.initial_state", f"must lie in 1..{len(universe)}")

    partition = NodePartition.from_ids(n, config.byzantine.ids)
    factorization = factorize(f)
    return Scenario(
        config=config,
        f=f,
        factorization=factorization,
        x=x,
        universe=universe,
        system=build_A1(universe, factorization.A),
        partition=partition,
        strategies=build_strategies(config),
        byzantine_blocks=byzantine_blocks(universe, partition),
        P=P,
    )
