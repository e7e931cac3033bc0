# oracle.py: black-box test functions and their gradient factorizations

"""
Builtin black-box functions f: ℝⁿ → ℝ.

The simulator knows each function in closed form so it can measure the
estimator, but the estimation path only ever calls `evaluate`. Gradients,
finite differences and the ground-truth feature map `v_true` are
measurement tools.

    capacity(C)     f(x) = 1 / (C − Σx),      pole at Σx = C
    linear(c)       f(x) = cᵀx
    quadratic(Q,c)  f(x) = ½ xᵀQx + cᵀx,      Q symmetric
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from errors import DomainError

FUNCTION_KINDS = ("capacity", "linear", "quadratic")


@dataclass(frozen=True, eq=False)
class BlackBoxFunction:
    kind: str
    n: int
    C: float | None = None
    c: np.ndarray | None = None
    Q: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in FUNCTION_KINDS:
            raise ValueError(f"unknown function kind {self.kind!r}; expected one of {FUNCTION_KINDS}")
        if self.n < 1:
            raise ValueError(f"dimension must be >= 1, got {self.n}")
        if self.kind == "capacity" and self.C is None:
            raise ValueError("capacity function requires C")
        if self.kind in ("linear", "quadratic"):
            c = np.zeros(self.n) if self.c is None else np.asarray(self.c, dtype=float)
            if c.shape != (self.n,):
                raise ValueError(f"c must have shape ({self.n},), got {c.shape}")
            object.__setattr__(self, "c", c)
        if self.kind == "quadratic":
            Q = np.asarray(self.Q, dtype=float)
            if Q.shape != (self.n, self.n):
                raise ValueError(f"Q must have shape ({self.n}, {self.n}), got {Q.shape}")
            if not np.allclose(Q, Q.T, rtol=0.0, atol=1e-12):
                raise ValueError("Q must be symmetric")
            object.__setattr__(self, "Q", Q)

    # -----------------------------------------------------------------
    # Constructors
    # -----------------------------------------------------------------
    @classmethod
    def capacity(cls, C: float, n: int) -> "BlackBoxFunction":
        return cls(kind="capacity", n=n, C=float(C))

    @classmethod
    def linear(cls, c: Sequence[float]) -> "BlackBoxFunction":
        c = np.asarray(c, dtype=float)
        return cls(kind="linear", n=len(c), c=c)

    @classmethod
    def quadratic(cls, Q: Sequence[Sequence[float]], c: Sequence[float] | None = None) -> "BlackBoxFunction":
        Q = np.asarray(Q, dtype=float)
        return cls(kind="quadratic", n=Q.shape[0], Q=Q, c=None if c is None else np.asarray(c, dtype=float))

    def _check(self, x: np.ndarray) -> float | None:
        if x.shape != (self.n,):
            raise ValueError(f"x must have shape ({self.n},), got {x.shape}")
        if self.kind == "capacity":
            slack = self.C - float(np.sum(x))
            if slack <= 0.0:
                raise DomainError(f"capacity pole: C − Σx = {slack:.6g} <= 0")
            return slack
        return None


@dataclass(frozen=True, eq=False)
class GradientFactorization:
    """∇f(x) = A·v(x) with a known n×m matrix A."""

    A: np.ndarray
    v_true: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    @property
    def m(self) -> int:
        return self.A.shape[1]

    @property
    def n(self) -> int:
        return self.A.shape[0]


# ---------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------
def evaluate(f: BlackBoxFunction, x) -> float:
    """Exact value f(x); the only call the estimation path makes."""
    x = np.asarray(x, dtype=float)
    slack = f._check(x)
    if f.kind == "capacity":
        return 1.0 / slack
    if f.kind == "linear":
        return float(f.c @ x)
    return float(0.5 * x @ f.Q @ x + f.c @ x)


def analytic_gradient(f: BlackBoxFunction, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    slack = f._check(x)
    if f.kind == "capacity":
        return np.full(f.n, slack ** -2)
    if f.kind == "linear":
        return f.c.copy()
    return f.Q @ x + f.c


def finite_diff_gradient(f: BlackBoxFunction, x, h: float = 1e-5) -> np.ndarray:
    """Central differences (f(x + h·eᵢ) − f(x − h·eᵢ)) / 2h, error O(h²)."""
    if h <= 0:
        raise ValueError(f"h must be > 0, got {h}")
    x = np.asarray(x, dtype=float)
    grad = np.empty(f.n)
    for i in range(f.n):
        step = np.zeros(f.n)
        step[i] = h
        grad[i] = (evaluate(f, x + step) - evaluate(f, x - step)) / (2.0 * h)
    return grad


def factorize(f: BlackBoxFunction) -> GradientFactorization:
    """
    Builtin factorizations satisfying ∇f = A·v:

        capacity   A = 1ₙ (n×1),   v(x) = [(C − Σx)⁻²]
        linear     A = c  (n×1),   v(x) = [1]
        quadratic  A = [Q | c],    v(x) = (x, 1)
    """
    if f.kind == "capacity":
        C = f.C

        def v_capacity(x):
            x = np.asarray(x, dtype=float)
            f._check(x)
            return np.array([(C - np.sum(x)) ** -2])

        return GradientFactorization(A=np.ones((f.n, 1)), v_true=v_capacity)

    if f.kind == "linear":
        return GradientFactorization(A=f.c.reshape(-1, 1).copy(), v_true=lambda x: np.ones(1))

    return GradientFactorization(
        A=np.hstack([f.Q, f.c.reshape(-1, 1)]),
        v_true=lambda x: np.append(np.asarray(x, dtype=float), 1.0),
    )


def evaluate_many(f: BlackBoxFunction, X) -> np.ndarray:
    """Row-wise `evaluate` over an (N, n) batch of points."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != f.n:
        raise ValueError(f"points must have {f.n} columns, got {X.shape[1]}")
    if f.kind == "capacity":
        slack = f.C - X.sum(axis=1)
        if np.any(slack <= 0.0):
            raise DomainError(f"capacity pole: min C − Σx = {slack.min():.6g} <= 0")
        return 1.0 / slack
    if f.kind == "linear":
        return X @ f.c
    return 0.5 * np.einsum("ij,jk,ik->i", X, f.Q, X) + X @ f.c
