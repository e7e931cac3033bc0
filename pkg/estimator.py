# estimator.py: two-timescale online estimator of ∇f(x)

"""
Online estimator
----------------
Each round k the activation chain picks u(k), the nodes run one
perturbation round and every good node applies the same two updates:

    fast   ẑ_u(k) ← ẑ_u(k) + b(k)(z − ẑ_u(k))                 only the visited block moves
    slow   v ← v + a(k) Σ_{u,i} Aᵢ(u)ᵀ sign(ẑ_{i,u} − Aᵢ(u)v)    post-update ẑ, sign(0) = 0

with a(k) = a0/(k+1)^α, b(k) = b0/(k+1)^β and 0.5 < β < α ≤ 1, so ẑ
tracks the mean observations while v descends the l1 objective J on a
slower clock. A·v is the gradient estimate.

Experiments divide a(k) by W = Σ_r ‖A₁,r‖₁ (schedule.normalize), so a step
near the optimum moves v by at most a(k) instead of a(k)·W.

Consistent broadcast makes every good node's state identical, so one
state is simulated.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from activation import make_chain
from bus import EventBus
from decode import StackedSystem, objective_J
from logger import get_logger
from oracle import analytic_gradient, evaluate
from perturb import PerturbationRound, expected_observation, run_round
from results.models import MetricsRecord
from results.sink import METRICS_TOPIC
from scenario import Scenario, build_scenario
from settings import ExperimentConfig, config_hash

log = get_logger("BYZGRAD.Estimator")


@dataclass(frozen=True)
class StepSchedule:
    a0: float = 1.0
    b0: float = 1.0
    alpha: float = 0.9
    beta: float = 0.6
    normalize: bool = False

    def __post_init__(self):
        if self.a0 <= 0 or self.b0 <= 0:
            raise ValueError(f"a0 and b0 must be > 0, got a0={self.a0}, b0={self.b0}")
        if not 0.5 < self.beta < self.alpha <= 1.0:
            raise ValueError(f"need 0.5 < beta < alpha <= 1, got alpha={self.alpha}, beta={self.beta}")


def schedule_values(sched: StepSchedule, k: int) -> tuple[float, float]:
    """(a(k), b(k)) for round k ≥ 0."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    return sched.a0 / (k + 1) ** sched.alpha, sched.b0 / (k + 1) ** sched.beta


@dataclass(eq=False)
class EstimatorState:
    """
    Shared decoder state. Mutable; owned by a single run.

    zhat[j, i] is 0 forever wherever member j leaves node i inactive.
    """

    zhat: np.ndarray
    v: np.ndarray
    k: int = 0
    visited: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.visited is None:
            self.visited = np.zeros(self.zhat.shape[0], dtype=bool)

    @classmethod
    def initial(cls, sys: StackedSystem) -> "EstimatorState":
        """v⁰ = 0 and ẑ⁰ = 0."""
        return cls(zhat=np.zeros((len(sys.universe), sys.n)), v=np.zeros(sys.m))


def estimator_step(
    state: EstimatorState,
    round: PerturbationRound,
    sys: StackedSystem,
    sched: StepSchedule,
    *,
    visited_only: bool = False,
    freeze_v: bool = False,
) -> EstimatorState:
    """
    Apply one fast and one slow update in place and return `state`.

    `visited_only` restricts the slow sum to blocks seen at least once;
    `freeze_v` skips the slow update entirely. With `sched.normalize` the
    slow step is a(k) divided by the total informative row weight of A₁.

    Raises:
        UnknownActivationError: round.u is not a universe member
    """
    if round.z.shape != (sys.n,):
        raise ValueError(f"round observation has shape {round.z.shape}, expected ({sys.n},)")
    block = sys.universe.index_of(round.u)
    a, b = schedule_values(sched, state.k)

    row = state.zhat[block]
    row += b * (round.z - row)
    state.visited[block] = True

    if not freeze_v:
        signs = np.sign(state.zhat.ravel() - sys.A1 @ state.v)
        if visited_only:
            signs *= np.repeat(state.visited, sys.n)
        if sched.normalize and sys.row_weight > 0.0:
            a /= sys.row_weight
        state.v = state.v + a * (sys.A1.T @ signs)

    state.k += 1
    return state


def gradient_estimate(state: EstimatorState, A, *, stacked: bool = False,
                      sys: StackedSystem | None = None) -> np.ndarray:
    """A·v (n entries); with `stacked`, the literal A₁·v (|𝒰|·n entries)."""
    if stacked:
        if sys is None:
            raise ValueError("stacked estimate needs the stacked system")
        return sys.A1 @ state.v
    return np.asarray(A, dtype=float) @ state.v


# ---------------------------------------------------------------------
# Naive baseline
# ---------------------------------------------------------------------
class NaiveAccumulator:
    """Per-node running average of zᵢ over the rounds in which node i was active."""

    def __init__(self, n: int):
        self.sums = np.zeros(n)
        self.counts = np.zeros(n)
        self.rounds = 0

    def update(self, round: PerturbationRound) -> None:
        self.sums += round.z
        self.counts += round.u.array
        self.rounds += 1

    def estimate(self) -> np.ndarray:
        """Averages, NaN where a node was never active."""
        if self.rounds == 0:
            raise ValueError("naive estimate of zero rounds is undefined")
        out = np.full(self.sums.shape, np.nan)
        seen = self.counts > 0
        out[seen] = self.sums[seen] / self.counts[seen]
        return out

    def missing(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.counts == 0))

    def error_linf(self, gradient: np.ndarray) -> float:
        """‖naive − ∇f‖∞, counting a never-active node as an estimate of 0."""
        seen = self.counts > 0
        est = np.zeros(self.sums.shape)
        est[seen] = self.sums[seen] / self.counts[seen]
        return float(np.max(np.abs(est - gradient)))


# ---------------------------------------------------------------------
# Full run
# ---------------------------------------------------------------------
@dataclass(eq=False)
class Trajectory:
    replication: int
    config_hash: str
    records: list[MetricsRecord]
    state: EstimatorState
    naive: NaiveAccumulator
    estimate: np.ndarray
    true_gradient: np.ndarray

    @property
    def final(self) -> MetricsRecord | None:
        return self.records[-1] if self.records else None


def exact_means(scenario: Scenario, x: np.ndarray) -> np.ndarray:
    """z̄ for every universe member, shape (|𝒰|, n)."""
    return np.array([
        expected_observation(x, u, scenario.config.perturb.delta, scenario.partition, scenario.strategies, scenario.f)
        for u in scenario.universe
    ])


def replication_streams(seed: int, replication: int, chain_seed: int | None = None):
    """Independent (chain, round) generators for one replication."""
    chain_ss, round_ss = np.random.SeedSequence([seed, replication]).spawn(2)
    if chain_seed is not None:
        chain_ss = np.random.SeedSequence([chain_seed, replication])
    return np.random.default_rng(chain_ss), np.random.default_rng(round_ss)


def _metrics(scenario: Scenario, state: EstimatorState, naive: NaiveAccumulator, zbar: np.ndarray,
             gradient: np.ndarray, replication: int) -> MetricsRecord:
    err = scenario.factorization.A @ state.v - gradient
    visited = state.visited
    zhat_err = float(np.max(np.abs(state.zhat[visited] - zbar[visited]))) if visited.any() else 0.0
    return MetricsRecord(
        k=state.k,
        err_l2=float(np.linalg.norm(err)),
        err_linf=float(np.max(np.abs(err))),
        J=objective_J(scenario.system, zbar.ravel(), state.v),
        zhat_err=zhat_err,
        naive_err_linf=naive.error_linf(gradient),
        replication=replication,
    )


def run_estimation(
    x,
    config: ExperimentConfig | Scenario,
    *,
    replication: int = 0,
    seed: int | None = None,
    bus: EventBus | None = None,
) -> Trajectory:
    """
    Run run.iterations rounds at the fixed point x and record metrics every
    run.metrics_stride rounds and after the last one.

    x=None uses the config's working point. Each record is also published
    on `bus` under the estimator.metrics topic.

    Raises:
        DomainError: a perturbed point hits the function's pole
        EnumerationLimitError: more than 20 active nodes in a member, so the
            exact means behind J and the tracking error cannot be enumerated
    """
    scenario = config if isinstance(config, Scenario) else build_scenario(config)
    cfg = scenario.config
    x = scenario.x if x is None else np.asarray(x, dtype=float)
    seed = cfg.seed if seed is None else seed
    run = cfg.run
    sys = scenario.system
    sched = StepSchedule(cfg.schedule.a0, cfg.schedule.b0, cfg.schedule.alpha, cfg.schedule.beta,
                         normalize=cfg.schedule.normalize)
    digest = config_hash(cfg)

    chain_rng, round_rng = replication_streams(seed, replication, cfg.chain.seed)
    chain = make_chain(
        scenario.universe,
        cfg.chain.mode,
        P=scenario.P,
        seed=chain_rng,
        initial_state=cfg.chain.initial_state - 1,
    )

    state = EstimatorState.initial(sys)
    naive = NaiveAccumulator(scenario.n)
    gradient = analytic_gradient(scenario.f, x)
    zbar = exact_means(scenario, x)
    f_base = evaluate(scenario.f, x)
    delta = cfg.perturb.delta
    records: list[MetricsRecord] = []

    log.info("estimation_started", replication=replication, seed=seed, iterations=run.iterations,
             universe=len(scenario.universe), byzantine_blocks=len(scenario.byzantine_blocks))

    for k in range(run.iterations):
        u = scenario.universe[chain.step()]
        rnd = run_round(x, u, delta, scenario.partition, scenario.strategies, scenario.f, round_rng,
                        k=k, f_base=f_base)
        estimator_step(state, rnd, sys, sched, visited_only=run.visited_only, freeze_v=run.freeze_v)
        naive.update(rnd)

        if state.k % run.metrics_stride == 0 or state.k == run.iterations:
            record = _metrics(scenario, state, naive, zbar, gradient, replication)
            records.append(record)
            if bus is not None:
                bus.publish(METRICS_TOPIC, asdict(record))

    estimate = gradient_estimate(state, scenario.factorization.A, stacked=run.stacked_estimate, sys=sys)
    final = records[-1] if records else None
    log.info("estimation_finished", replication=replication, iterations=state.k,
             err_linf=None if final is None else final.err_linf,
             naive_err_linf=None if final is None else final.naive_err_linf)

    return Trajectory(
        replication=replication,
        config_hash=digest,
        records=records,
        state=state,
        naive=naive,
        estimate=estimate,
        true_gradient=gradient,
    )
