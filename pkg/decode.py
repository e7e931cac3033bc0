# decode.py: stacked observation system, l1 decoders and recoverability

"""
Secure estimation core
----------------------
For a universe 𝒰 and the known matrix A (n×m) the mean observations obey

    z̄ = A₁ v + e,      A₁ = [A(u₁); A(u₂); …],   A(u) = A with row i zeroed when uᵢ = 0

and v is recovered as the minimizer of J(v) = Σ_r |z̄_r − A₁,r v|.

Row r of A₁ belongs to block r // n and node r % n (0-based). Rows that are
identically zero are inert: corrupting them shifts J by a constant. They
are left out of every recoverability count.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from errors import EnumerationLimitError, UnderdeterminedError
from logger import get_logger
from model import ActivationUniverse, ActivationVector

log = get_logger("BYZGRAD.Decode")

PIVOT_TOL = 1e-10
MAX_ENUM_ROWS = 64
MAX_ENUM_M = 7
MAX_ENUM_SUBSETS = 200_000
DEFAULT_DIRECTIONS = 4096


@dataclass(frozen=True, eq=False)
class StackedSystem:
    A1: np.ndarray
    row_map: tuple[tuple[int, int], ...]
    universe: ActivationUniverse
    A: np.ndarray

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.A.shape[1]

    @property
    def rows(self) -> int:
        return self.A1.shape[0]

    @property
    def nonzero(self) -> np.ndarray:
        """Boolean mask of rows carrying information."""
        return np.any(self.A1 != 0.0, axis=1)

    @cached_property
    def row_weight(self) -> float:
        """W = Σ_r ‖A₁,r‖₁, the largest possible |A₁ᵀ s| for a sign vector s when m = 1."""
        return float(np.abs(self.A1).sum())

    def block_rows(self, block: int) -> slice:
        return slice(block * self.n, (block + 1) * self.n)


@dataclass(frozen=True)
class CorruptionModel:
    """Block-constant corruption e = [e_u·1ᵀ]_u, nonzero only on corrupted blocks."""

    corrupted_blocks: frozenset[int]
    per_block_error: dict[int, float] = field(default_factory=dict)

    def vector(self, sys: StackedSystem) -> np.ndarray:
        e = np.zeros(sys.rows)
        for block in self.corrupted_blocks:
            e[sys.block_rows(block)] = self.per_block_error.get(block, 0.0)
        return e


@dataclass(frozen=True, eq=False)
class SubgradientResult:
    v: np.ndarray
    v_best: np.ndarray
    J: float
    J_best: float
    iterations: int


@dataclass(frozen=True)
class RecoverabilityReport:
    q: int
    holds: bool
    strict: bool
    exact: bool
    margin: float          # min over checked directions of (clean − corrupted) response
    directions: int = 0


@dataclass(frozen=True)
class Tolerance:
    q_max: int
    block_bound: int              # literal ⌊q_max / n⌋
    effective_block_bound: int    # largest b such that every b blocks are recoverable
    nonzero_rows: int
    exact: bool


# ---------------------------------------------------------------------
# System construction and objective
# ---------------------------------------------------------------------
def build_A1(universe: ActivationUniverse, A) -> StackedSystem:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != universe.n:
        raise ValueError(f"A must be {universe.n}×m, got shape {A.shape}")
    mask = universe.matrix()
    A1 = (mask[:, :, None] * A[None, :, :]).reshape(len(universe) * universe.n, A.shape[1])
    row_map = tuple((block, node) for block in range(len(universe)) for node in range(universe.n))
    return StackedSystem(A1=A1, row_map=row_map, universe=universe, A=A)


def stacked_from_rows(A1) -> StackedSystem:
    """Wrap a bare row matrix as a one-block system (one all-active member, A = A1)."""
    A1 = np.atleast_2d(np.asarray(A1, dtype=float))
    return build_A1(ActivationUniverse([ActivationVector((1,) * A1.shape[0])]), A1)


def objective_J(sys: StackedSystem, zbar, v) -> float:
    zbar = np.asarray(zbar, dtype=float)
    v = np.asarray(v, dtype=float)
    if zbar.shape != (sys.rows,) or v.shape != (sys.m,):
        raise ValueError(f"expected zbar of length {sys.rows} and v of length {sys.m}")
    return float(np.abs(zbar - sys.A1 @ v).sum())


# ---------------------------------------------------------------------
# Decoders
# ---------------------------------------------------------------------
def weighted_median(values: np.ndarray, weights: np.ndarray) -> float:
    """Lower weighted median: smallest value whose cumulative weight reaches half the total."""
    order = np.argsort(values, kind="stable")
    sorted_values = values[order]
    cumulative = np.cumsum(weights[order])
    total = cumulative[-1]
    position = int(np.searchsorted(cumulative, 0.5 * total - 1e-12 * total, side="left"))
    return float(sorted_values[min(position, len(sorted_values) - 1)])


def decode_weighted_median(sys: StackedSystem, zbar) -> np.ndarray:
    """Exact l1 decoder for m = 1."""
    if sys.m != 1:
        raise ValueError(f"weighted-median decoding needs m = 1, got m = {sys.m}")
    zbar = np.asarray(zbar, dtype=float)
    a = sys.A1[:, 0]
    keep = a != 0.0
    if not np.any(keep):
        raise UnderdeterminedError("every row of A1 is zero")
    return np.array([weighted_median(zbar[keep] / a[keep], np.abs(a[keep]))])


def decode_enumerate(sys: StackedSystem, zbar) -> np.ndarray:
    """
    Brute-force l1 minimizer: J is piecewise linear and convex, so a
    minimizer sits where m independent residuals vanish. Every m-subset of
    informative rows is solved; v = 0 is added as a candidate. Ties go to
    the lexicographically smallest v.
    """
    zbar = np.asarray(zbar, dtype=float)
    if sys.rows > MAX_ENUM_ROWS or sys.m > MAX_ENUM_M:
        raise EnumerationLimitError(
            f"enumeration is limited to {MAX_ENUM_ROWS} rows and m <= {MAX_ENUM_M}, "
            f"got {sys.rows} rows and m = {sys.m}"
        )
    rows = np.flatnonzero(sys.nonzero)
    if rows.size < sys.m or np.linalg.matrix_rank(sys.A1[rows]) < sys.m:
        raise UnderdeterminedError(f"A1 has rank below m = {sys.m}")
    if math.comb(rows.size, sys.m) > MAX_ENUM_SUBSETS:
        raise EnumerationLimitError(
            f"C({rows.size}, {sys.m}) subsets exceed the enumeration bound {MAX_ENUM_SUBSETS}"
        )

    subsets = np.array(list(itertools.combinations(rows.tolist(), sys.m)), dtype=int)
    blocks = sys.A1[subsets]                        # (S, m, m)
    rhs = zbar[subsets]                             # (S, m)
    smallest = np.linalg.svd(blocks, compute_uv=False)[:, -1]
    regular = smallest > PIVOT_TOL
    candidates = np.linalg.solve(blocks[regular], rhs[regular][..., None])[..., 0]
    candidates = np.vstack([candidates, np.zeros((1, sys.m))])

    # J over informative rows only; inert rows shift it by a constant
    J = np.abs(zbar[None, rows] - candidates @ sys.A1[rows].T).sum(axis=1)
    best = J.min()
    tied = candidates[J <= best + 1e-12 * max(1.0, best)]
    # lexsort keys run last-to-first
    return tied[np.lexsort(tied.T[::-1])[0]].copy()


def decode_subgradient(sys: StackedSystem, zbar, v0=None, *, a0: float = 1.0,
                       step_exponent: float = 0.9, iters: int = 10_000) -> SubgradientResult:
    """
    Offline form of the slow timescale:

        v ← v + a(t) Σ_r A₁,rᵀ sign(z̄_r − A₁,r v),   a(t) = a0 / (t+1)^step_exponent,   sign(0) = 0

    Returns the final iterate and the best-J iterate seen.
    """
    return decode_subgradient_batch(
        [sys], [zbar], None if v0 is None else [v0],
        a0=a0, step_exponent=step_exponent, iters=iters,
    )[0]


def decode_subgradient_batch(systems: list[StackedSystem], zbars, v0s=None, *, a0: float = 1.0,
                             step_exponent: float = 0.9, iters: int = 10_000) -> list[SubgradientResult]:
    """
    Run `decode_subgradient` on many systems of the same m at once.

    Informative rows are packed into a (B, R, m) array padded with zero
    rows; a zero row has residual 0 and never moves v.
    """
    if iters < 1:
        raise ValueError(f"iters must be >= 1, got {iters}")
    if not systems:
        return []
    m = systems[0].m
    if any(s.m != m for s in systems):
        raise ValueError("every system in a batch must share the same m")
    zbars = [np.asarray(z, dtype=float) for z in zbars]
    if len(zbars) != len(systems):
        raise ValueError(f"got {len(zbars)} observation vectors for {len(systems)} systems")

    width = max(int(s.nonzero.sum()) for s in systems)
    A = np.zeros((len(systems), width, m))
    Z = np.zeros((len(systems), width))
    offsets = np.zeros(len(systems))
    for b, (s, zbar) in enumerate(zip(systems, zbars)):
        if zbar.shape != (s.rows,):
            raise ValueError(f"expected zbar of length {s.rows}, got {zbar.shape}")
        keep = s.nonzero
        count = int(keep.sum())
        A[b, :count] = s.A1[keep]
        Z[b, :count] = zbar[keep]
        offsets[b] = np.abs(zbar[~keep]).sum()
    V = np.zeros((len(systems), m)) if v0s is None else np.array(v0s, dtype=float).reshape(len(systems), m)

    residual = Z - np.einsum("brm,bm->br", A, V)
    J = np.abs(residual).sum(axis=1)
    V_best, J_best = V.copy(), J.copy()
    for t in range(iters):
        V = V + (a0 / (t + 1) ** step_exponent) * np.einsum("brm,br->bm", A, np.sign(residual))
        residual = Z - np.einsum("brm,bm->br", A, V)
        J = np.abs(residual).sum(axis=1)
        better = J < J_best
        V_best[better] = V[better]
        J_best[better] = J[better]

    return [
        SubgradientResult(v=V[b].copy(), v_best=V_best[b].copy(), J=float(J[b] + offsets[b]),
                          J_best=float(J_best[b] + offsets[b]), iterations=iters)
        for b in range(len(systems))
    ]


# ---------------------------------------------------------------------
# Recoverability
# ---------------------------------------------------------------------
def _sample_directions(sys: StackedSystem, n_dir: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    sampled = rng.standard_normal((n_dir, sys.m))
    rows = sys.A1[sys.nonzero]
    directions = np.vstack([sampled, np.eye(sys.m), rows])
    return directions / np.linalg.norm(directions, axis=1, keepdims=True)


def _responses(sys: StackedSystem, n_dir: int, seed: int) -> np.ndarray:
    """|A₁,r z| for informative rows r (axis 0) and test directions z (axis 1)."""
    rows = sys.A1[sys.nonzero]
    if sys.m == 1:
        return np.abs(rows)
    return np.abs(rows @ _sample_directions(sys, n_dir, seed).T)


def _margins(responses: np.ndarray, q: int) -> np.ndarray:
    """Per direction: (sum of all but the q largest) − (sum of the q largest)."""
    ordered = -np.sort(-responses, axis=0)
    worst = ordered[:q].sum(axis=0)
    return ordered.sum(axis=0) - 2.0 * worst


def check_recoverability(sys: StackedSystem, q: int, *, n_dir: int = DEFAULT_DIRECTIONS,
                         seed: int = 0) -> RecoverabilityReport:
    """
    For every set K of q informative rows: Σ_K |A₁,r z| ≤ Σ_Kᶜ |A₁,r z| for all z ≠ 0.

    m = 1 is exact (the worst K holds the q largest |a_r|). For m > 1 the
    condition is tested on `n_dir` seeded random directions plus the
    coordinate and row directions, so a pass is a certificate only over
    those directions (`exact=False`).
    """
    informative = int(sys.nonzero.sum())
    if not 0 <= q <= informative:
        raise ValueError(f"q must be in 0..{informative}, got {q}")
    responses = _responses(sys, n_dir, seed)
    margins = _margins(responses, q)
    scale = max(1.0, float(responses.sum(axis=0).max(initial=0.0)))
    margin = float(margins.min())
    return RecoverabilityReport(
        q=q,
        holds=margin >= -1e-12 * scale,
        strict=margin > 1e-12 * scale,
        exact=sys.m == 1,
        margin=margin,
        directions=responses.shape[1],
    )


def condition_table(sys: StackedSystem, *, n_dir: int = DEFAULT_DIRECTIONS, seed: int = 0) -> list[RecoverabilityReport]:
    informative = int(sys.nonzero.sum())
    return [check_recoverability(sys, q, n_dir=n_dir, seed=seed) for q in range(informative + 1)]


def _effective_block_bound(sys: StackedSystem, n_dir: int, seed: int) -> int:
    """Largest b such that the b blocks with the largest total response stay recoverable."""
    responses = np.abs(sys.A1) if sys.m == 1 else np.abs(sys.A1 @ _sample_directions(sys, n_dir, seed).T)
    per_block = responses.reshape(len(sys.universe), sys.n, -1).sum(axis=1)   # (|𝒰|, dirs)
    ordered = -np.sort(-per_block, axis=0)
    total = ordered.sum(axis=0)
    scale = max(1.0, float(total.max(initial=0.0)))
    bound = 0
    for b in range(1, len(sys.universe) + 1):
        worst = ordered[:b].sum(axis=0)
        if np.any(total - 2.0 * worst < -1e-12 * scale):
            break
        bound = b
    return bound


def max_tolerable_q(sys: StackedSystem, *, n_dir: int = DEFAULT_DIRECTIONS, seed: int = 0) -> Tolerance:
    """Largest q passing `check_recoverability`; the condition is monotone in q, so bisect."""
    informative = int(sys.nonzero.sum())
    lo, hi = 0, informative
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if check_recoverability(sys, mid, n_dir=n_dir, seed=seed).holds:
            lo = mid
        else:
            hi = mid - 1
    tolerance = Tolerance(
        q_max=lo,
        block_bound=lo // sys.n,
        effective_block_bound=_effective_block_bound(sys, n_dir, seed),
        nonzero_rows=informative,
        exact=sys.m == 1,
    )
    log.debug("max_tolerable_q", q_max=tolerance.q_max, block_bound=tolerance.block_bound,
              effective_block_bound=tolerance.effective_block_bound, rows=informative)
    return tolerance
