# perturb.py: one simultaneous-perturbation round with Byzantine participants

"""
Perturbation round
------------------
Every active good node i draws Δᵢ ∈ {−1, +1} with probability ½ and plays
xᵢ + δΔᵢ. An active Byzantine node plays xᵢ + δeᵢ¹ with eᵢ¹ chosen by its
strategy. All nodes then see one broadcast vector

    zᵢ = (f(x + δΔ̃) − f(x)) / (δΔ̃ᵢ)    i active and good
    zᵢ = strategy report                 i active and Byzantine
    zᵢ = 0                               i inactive

Byzantine influence enters twice: through eᵢ¹ in everyone's difference
quotient, and through the node's own reported zᵢ. `report_only=True`
keeps the play honest and corrupts only the report.
"""

from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from errors import EnumerationLimitError
from model import ActivationVector, NodePartition
from oracle import BlackBoxFunction, evaluate, evaluate_many

STRATEGY_KINDS = ("obedient", "constant_offset", "gaussian", "sign_flip_scaled")
DEFAULT_DELTA = 0.01
DEFAULT_ZERO_FLOOR = 1e-6
MAX_ENUMERATED_NODES = 20


# ==============================================================================
#  Byzantine strategies
# ==============================================================================
class ByzantineStrategy(ABC):
    """
    Behaviour of a Byzantine node during one round.

    `perturbation` receives the node's own fair sign and a standard normal
    draw from the round's stream, so every strategy is replayable under a
    fixed seed. Subclass to add new (e.g. state-aware) attacks.
    """

    kind: str = ""
    uses_noise: bool = False

    def __init__(self, *, report_offset: float = 0.0, report_only: bool = False,
                 zero_floor: float = DEFAULT_ZERO_FLOOR):
        if zero_floor <= 0:
            raise ValueError(f"zero_floor must be > 0, got {zero_floor}")
        self.report_offset = float(report_offset)
        self.report_only = bool(report_only)
        self.zero_floor = float(zero_floor)

    @abstractmethod
    def perturbation(self, sign: float, noise: float) -> float:
        """eᵢ¹ played in place of the fair sign."""
        raise NotImplementedError

    def mean_perturbation(self, sign: float) -> float:
        """Noise-free action used by the exact expectation."""
        return self.perturbation(sign, 0.0)

    def play(self, sign: float, noise: float) -> float:
        return sign if self.report_only else self.perturbation(sign, noise)

    def mean_play(self, sign: float) -> float:
        return sign if self.report_only else self.mean_perturbation(sign)

    def divisor(self, played: float) -> float:
        """Own-report divisor; an exact zero is lifted to the floor."""
        return played if played != 0.0 else self.zero_floor

    def report(self, difference: float, delta: float, played: float) -> float:
        return difference / (delta * self.divisor(played)) + self.report_offset

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "report_offset": self.report_offset,
            "report_only": self.report_only,
            "zero_floor": self.zero_floor,
        }


class Obedient(ByzantineStrategy):
    kind = "obedient"

    def perturbation(self, sign: float, noise: float) -> float:
        return sign


class ConstantOffset(ByzantineStrategy):
    """Always plays eᵢ¹ = M. With report_only and no explicit offset, reports +M instead."""

    kind = "constant_offset"

    def __init__(self, M: float = 10.0, **kwargs):
        super().__init__(**kwargs)
        self.M = float(M)
        if self.report_only and self.report_offset == 0.0:
            self.report_offset = self.M

    def perturbation(self, sign: float, noise: float) -> float:
        return self.M

    def describe(self) -> dict:
        return {**super().describe(), "M": self.M}


class Gaussian(ByzantineStrategy):
    """Fair sign jittered by N(0, σ²)."""

    kind = "gaussian"
    uses_noise = True

    def __init__(self, sigma: float = 1.0, **kwargs):
        super().__init__(**kwargs)
        if sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {sigma}")
        self.sigma = float(sigma)

    def perturbation(self, sign: float, noise: float) -> float:
        return sign + self.sigma * noise

    def describe(self) -> dict:
        return {**super().describe(), "sigma": self.sigma}


class SignFlipScaled(ByzantineStrategy):
    """Plays −s times the fair sign."""

    kind = "sign_flip_scaled"

    def __init__(self, s: float = 1.0, **kwargs):
        super().__init__(**kwargs)
        self.s = float(s)

    def perturbation(self, sign: float, noise: float) -> float:
        return -self.s * sign

    def describe(self) -> dict:
        return {**super().describe(), "s": self.s}


_STRATEGIES: dict[str, type[ByzantineStrategy]] = {
    cls.kind: cls for cls in (Obedient, ConstantOffset, Gaussian, SignFlipScaled)
}


def make_strategy(kind: str, **params) -> ByzantineStrategy:
    try:
        cls = _STRATEGIES[kind]
    except KeyError:
        raise ValueError(f"unknown Byzantine strategy {kind!r}; expected one of {STRATEGY_KINDS}") from None
    return cls(**params)


Strategies = Mapping[int, ByzantineStrategy] | ByzantineStrategy | None


def _strategy_for(strategies: Strategies, node: int) -> ByzantineStrategy:
    if strategies is None:
        return _OBEDIENT
    if isinstance(strategies, ByzantineStrategy):
        return strategies
    return strategies.get(node, _OBEDIENT)


_OBEDIENT = Obedient()


# ==============================================================================
#  Rounds
# ==============================================================================
@dataclass(frozen=True, eq=False)
class PerturbationRound:
    k: int
    u: ActivationVector
    delta_tilde: np.ndarray
    z: np.ndarray
    f_base: float
    f_perturbed: float


def run_round(
    x: np.ndarray,
    u: ActivationVector,
    delta: float,
    partition: NodePartition,
    strategies: Strategies,
    f: BlackBoxFunction,
    rng: np.random.Generator,
    *,
    k: int = 0,
    f_base: float | None = None,
) -> PerturbationRound:
    """
    Execute one round and return the broadcast observations.

    A full n-vector of signs is drawn every round whatever the activation,
    so node i in round k always consumes the same draw of the stream.
    `f_base` may be passed in when x is fixed across rounds.

    Raises:
        DomainError: the perturbed point hits the function's pole
    """
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    n = partition.n
    signs = 2.0 * rng.integers(0, 2, size=n) - 1.0

    active_byz = [i for i in u.active if partition.is_byzantine(i)]
    noise = None
    if any(_strategy_for(strategies, i).uses_noise for i in active_byz):
        noise = rng.standard_normal(n)

    delta_tilde = signs * u.array
    for i in active_byz:
        delta_tilde[i] = _strategy_for(strategies, i).play(signs[i], 0.0 if noise is None else noise[i])

    if f_base is None:
        f_base = evaluate(f, x)
    f_perturbed = evaluate(f, x + delta * delta_tilde)
    difference = f_perturbed - f_base

    divisor = np.where(delta_tilde != 0.0, delta_tilde, 1.0)
    z = u.array * (difference / (delta * divisor))
    for i in active_byz:
        z[i] = _strategy_for(strategies, i).report(difference, delta, delta_tilde[i])

    return PerturbationRound(k=k, u=u, delta_tilde=delta_tilde, z=z, f_base=f_base, f_perturbed=f_perturbed)


def expected_observation(
    x: np.ndarray,
    u: ActivationVector,
    delta: float,
    partition: NodePartition,
    strategies: Strategies,
    f: BlackBoxFunction,
) -> np.ndarray:
    """
    Exact mean observation z̄_u(x), averaging over every sign pattern of the
    active nodes. Byzantine nodes play their noise-free action.

    Byzantine signs are enumerated too, since obedient and sign-flip plays
    depend on them, so the bound counts every active node.

    Raises:
        EnumerationLimitError: more than 20 active nodes, good or Byzantine;
            use a Monte Carlo average of `run_round` instead
    """
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    x = np.asarray(x, dtype=float)
    active = u.active
    if len(active) > MAX_ENUMERATED_NODES:
        raise EnumerationLimitError(
            f"{len(active)} active nodes exceed the enumeration bound {MAX_ENUMERATED_NODES}; "
            "average run_round samples instead"
        )

    patterns = np.array(list(itertools.product((-1.0, 1.0), repeat=len(active))))
    played = patterns.copy()
    byz_cols = [(col, i) for col, i in enumerate(active) if partition.is_byzantine(i)]
    for col, i in byz_cols:
        strategy = _strategy_for(strategies, i)
        played[:, col] = [strategy.mean_play(s) for s in patterns[:, col]]

    tilde = np.zeros((len(patterns), partition.n))
    tilde[:, list(active)] = played
    difference = evaluate_many(f, x + delta * tilde) - evaluate(f, x)

    z = np.zeros((len(patterns), partition.n))
    for col, i in enumerate(active):
        if partition.is_byzantine(i):
            continue
        z[:, i] = difference / (delta * played[:, col])
    for col, i in byz_cols:
        strategy = _strategy_for(strategies, i)
        z[:, i] = [strategy.report(d, delta, p) for d, p in zip(difference, played[:, col])]

    return z.mean(axis=0)
