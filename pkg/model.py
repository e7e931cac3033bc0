# model.py: nodes, Byzantine partition and activation universes

"""
Domain types shared by every other module.

Node indices are 1-based in configs and docs and 0-based everywhere in code.
`NodePartition.from_ids` is the single place the two meet.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from errors import UniverseError, UnknownActivationError

UNIVERSE_MODES = ("singletons", "all_nonempty_subsets", "custom", "random_subsets")


@dataclass(frozen=True)
class NodePartition:
    """Split of the n nodes into Byzantine and good sets (0-based, fixed for a run)."""

    n: int
    byzantine: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise UniverseError(f"node count must be >= 1, got {self.n}")
        stray = sorted(i for i in self.byzantine if not 0 <= i < self.n)
        if stray:
            raise UniverseError(f"Byzantine ids outside 0..{self.n - 1}: {stray}")
        object.__setattr__(self, "byzantine", frozenset(self.byzantine))

    @classmethod
    def from_ids(cls, n: int, ids: Iterable[int]) -> "NodePartition":
        """Build from 1-based node ids as written in configs."""
        ids = list(ids)
        stray = sorted(i for i in ids if not 1 <= i <= n)
        if stray:
            raise UniverseError(f"Byzantine ids outside 1..{n}: {stray}")
        return cls(n=n, byzantine=frozenset(i - 1 for i in ids))

    @property
    def good(self) -> frozenset[int]:
        return frozenset(range(self.n)) - self.byzantine

    def is_byzantine(self, i: int) -> bool:
        return i in self.byzantine

    def mask(self) -> np.ndarray:
        """Boolean vector, True at Byzantine nodes."""
        out = np.zeros(self.n, dtype=bool)
        out[list(self.byzantine)] = True
        return out


@dataclass(frozen=True)
class ActivationVector:
    """Binary participation pattern u ∈ {0,1}ⁿ with at least one active node."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits:
            raise UniverseError("activation vector must have length >= 1")
        if any(b not in (0, 1) for b in bits):
            raise UniverseError(f"activation vector must be binary, got {bits}")
        if not any(bits):
            raise UniverseError("all-zero activation vectors are excluded")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def of(cls, active: Iterable[int], n: int) -> "ActivationVector":
        """Vector with the given 0-based node indices switched on."""
        bits = [0] * n
        for i in active:
            bits[i] = 1
        return cls(tuple(bits))

    @property
    def n(self) -> int:
        return len(self.bits)

    @cached_property
    def active(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits) if b)

    @cached_property
    def array(self) -> np.ndarray:
        """0/1 float vector; shared, do not mutate."""
        return np.asarray(self.bits, dtype=float)

    def touches(self, nodes: Iterable[int]) -> bool:
        return any(self.bits[i] for i in nodes)


class ActivationUniverse:
    """
    Ordered, duplicate-free state space 𝒰 of the activation chain.

    The member order is fixed at construction and is the row-block order of
    the stacked decoding matrix.
    """

    def __init__(self, members: Sequence[ActivationVector]):
        if not members:
            raise UniverseError("activation universe must not be empty")
        n = members[0].n
        index: dict[tuple[int, ...], int] = {}
        for u in members:
            if u.n != n:
                raise UniverseError(f"vector length mismatch: expected {n}, got {u.n}")
            if u.bits in index:
                raise UniverseError(f"duplicate activation vector {u.bits}")
            index[u.bits] = len(index)
        self._members = tuple(members)
        self._index = index
        self._matrix = np.array([u.bits for u in members], dtype=float)
        self._matrix.setflags(write=False)

    @property
    def n(self) -> int:
        return self._members[0].n

    @property
    def members(self) -> tuple[ActivationVector, ...]:
        return self._members

    def __len__(self) -> int:
        return len(self._members)

    def __iter__(self) -> Iterator[ActivationVector]:
        return iter(self._members)

    def __getitem__(self, position: int) -> ActivationVector:
        return self._members[position]

    def index_of(self, u: ActivationVector | Sequence[int]) -> int:
        bits = u.bits if isinstance(u, ActivationVector) else tuple(int(b) for b in u)
        try:
            return self._index[bits]
        except KeyError:
            raise UnknownActivationError(f"activation vector {bits} is not in the universe") from None

    def matrix(self) -> np.ndarray:
        """|𝒰|×n read-only 0/1 matrix, one member per row."""
        return self._matrix

    def to_lists(self) -> list[list[int]]:
        return [list(u.bits) for u in self._members]


# ---------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------
def _lexicographic(vectors: Iterable[tuple[int, ...]]) -> list[ActivationVector]:
    return [ActivationVector(bits) for bits in sorted(set(vectors))]


def build_universe(
    mode: str,
    n: int,
    *,
    custom: Sequence[Sequence[int]] | None = None,
    count: int | None = None,
    size: int | None = None,
    seed: int = 0,
) -> ActivationUniverse:
    """
    Build one of the standard activation universes.

    singletons             e_1, ..., e_n in node order (member j activates node j)
    all_nonempty_subsets   every nonzero vector, lexicographic
    custom                 the given vectors in the given order, repeats dropped
    random_subsets         `count` seeded draws of `size`-node subsets, deduplicated, lexicographic
    """
    if n < 1:
        raise UniverseError(f"node count must be >= 1, got {n}")

    if mode == "singletons":
        return ActivationUniverse([ActivationVector.of([i], n) for i in range(n)])

    if mode == "all_nonempty_subsets":
        return ActivationUniverse(
            _lexicographic(bits for bits in itertools.product((0, 1), repeat=n) if any(bits))
        )

    if mode == "custom":
        if not custom:
            raise UniverseError("custom universe requires a non-empty vector list")
        for row in custom:
            if len(row) != n:
                raise UniverseError(f"vector length mismatch: expected {n}, got {len(row)}")
        # repeats collapse onto their first occurrence
        unique = dict.fromkeys(tuple(int(b) for b in row) for row in custom)
        return ActivationUniverse([ActivationVector(bits) for bits in unique])

    if mode == "random_subsets":
        if size is None or not 1 <= size <= n:
            raise UniverseError(f"random_subsets size must be in 1..{n}, got {size}")
        if count is None or count < 1:
            raise UniverseError(f"random_subsets count must be >= 1, got {count}")
        rng = np.random.default_rng(seed)
        draws = []
        for _ in range(count):
            chosen = rng.choice(n, size=size, replace=False)
            draws.append(ActivationVector.of(chosen.tolist(), n).bits)
        return ActivationUniverse(_lexicographic(draws))

    raise UniverseError(f"unknown universe mode {mode!r}; expected one of {UNIVERSE_MODES}")


def byzantine_blocks(universe: ActivationUniverse, partition: NodePartition) -> frozenset[int]:
    """Positions of the members that activate at least one Byzantine node (𝒰_B)."""
    if universe.n != partition.n:
        raise UniverseError(f"universe has n={universe.n} but partition has n={partition.n}")
    if not partition.byzantine:
        return frozenset()
    return frozenset(j for j, u in enumerate(universe) if u.touches(partition.byzantine))
