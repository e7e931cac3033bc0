# activation.py: the activation Markov chain Y(k) over the universe

from __future__ import annotations

import bisect
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from errors import ChainError, StationaryError
from logger import get_logger
from model import ActivationUniverse

log = get_logger("BYZGRAD.Activation")

CHAIN_MODES = ("iid_uniform", "custom")
ROW_SUM_TOL = 1e-12


def validate_transition_matrix(P) -> np.ndarray:
    """
    Return P as a float array after checking it is square, non-negative,
    row-stochastic within 1e−12 and irreducible.
    """
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
        raise ChainError(f"transition matrix must be square and non-empty, got shape {P.shape}")
    if np.any(P < 0.0):
        raise ChainError("transition matrix has negative entries")
    bad_rows = np.flatnonzero(np.abs(P.sum(axis=1) - 1.0) > ROW_SUM_TOL)
    if bad_rows.size:
        raise ChainError(f"rows {(bad_rows + 1).tolist()} do not sum to 1")
    if not is_irreducible(P):
        raise ChainError("transition matrix is reducible")
    return P


def is_irreducible(P: np.ndarray) -> bool:
    """Strong connectivity of the directed graph of positive entries."""
    count, _ = connected_components(np.asarray(P) > 0.0, directed=True, connection="strong")
    return count == 1


class ActivationChain:
    """
    Irreducible Markov chain over the members of an activation universe.

    Single-owner: the current state and the RNG stream are mutable, so each
    replication builds its own chain.
    """

    def __init__(self, universe: ActivationUniverse, P: np.ndarray, rng: np.random.Generator,
                 initial_state: int = 0):
        if P.shape[0] != len(universe):
            raise ChainError(f"P has {P.shape[0]} states but the universe has {len(universe)}")
        if not 0 <= initial_state < len(universe):
            raise ChainError(f"initial state {initial_state + 1} outside 1..{len(universe)}")
        self.universe = universe
        self.P = P
        self.state = initial_state
        self._rng = rng
        # cumulative rows as plain lists for bisect
        cumulative = np.cumsum(P, axis=1)
        cumulative[:, -1] = 1.0
        self._cumulative = [row.tolist() for row in cumulative]
        self._uniform = bool(np.all(P == P[0])) and np.allclose(P[0], 1.0 / len(universe))

    def step(self) -> int:
        """Advance one transition and return the new 0-based universe index."""
        r = self._rng.random()
        if self._uniform:
            nxt = min(int(r * len(self._cumulative)), len(self._cumulative) - 1)
        else:
            nxt = bisect.bisect_right(self._cumulative[self.state], r)
            nxt = min(nxt, len(self._cumulative) - 1)
        self.state = nxt
        return nxt


def make_chain(
    universe: ActivationUniverse,
    mode: str = "iid_uniform",
    *,
    P: Sequence[Sequence[float]] | None = None,
    seed: int | np.random.SeedSequence | np.random.Generator = 0,
    initial_state: int = 0,
) -> ActivationChain:
    """
    Build a seeded activation chain.

    iid_uniform   every row is the uniform distribution over 𝒰
    custom        the given row-stochastic, irreducible P
    """
    size = len(universe)
    if mode == "iid_uniform":
        matrix = np.full((size, size), 1.0 / size)
    elif mode == "custom":
        if P is None:
            raise ChainError("custom chain requires a transition matrix P")
        matrix = validate_transition_matrix(P)
    else:
        raise ChainError(f"unknown chain mode {mode!r}; expected one of {CHAIN_MODES}")

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return ActivationChain(universe, matrix, rng, initial_state=initial_state)


def step_chain(chain: ActivationChain) -> int:
    return chain.step()


def stationary_distribution(P, tol: float = 1e-12, max_iter: int = 100_000) -> np.ndarray:
    """
    π with πP = π and Σπ = 1 by power iteration from the uniform vector.

    Periodic chains never settle under plain iteration; after `max_iter`
    steps the lazy averaged iterate π ← ½(π + πP) takes over. It has the
    same fixed point and converges for every irreducible chain.
    """
    P = np.asarray(P, dtype=float)
    size = P.shape[0]
    pi = np.full(size, 1.0 / size)

    for _ in range(max_iter):
        nxt = pi @ P
        if np.abs(nxt - pi).sum() <= tol:
            return nxt / nxt.sum()
        pi = nxt

    log.warning("stationary_power_iteration_stalled", states=size, max_iter=max_iter)

    pi = np.full(size, 1.0 / size)
    for _ in range(max_iter):
        nxt = 0.5 * (pi + pi @ P)
        if np.abs(nxt @ P - nxt).sum() <= tol:
            return nxt / nxt.sum()
        pi = nxt

    raise StationaryError(f"stationary distribution did not converge within {max_iter} averaged iterations")


def occupation_frequencies(chain: ActivationChain, steps: int) -> np.ndarray:
    """Empirical visit frequencies over the next `steps` transitions."""
    counts = np.zeros(len(chain.universe))
    for _ in range(steps):
        counts[chain.step()] += 1
    return counts / max(steps, 1)


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float)).sum())
