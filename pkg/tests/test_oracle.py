# tests/test_oracle.py

import numpy as np
import pytest

from errors import DomainError
from oracle import (
    BlackBoxFunction,
    analytic_gradient,
    evaluate,
    evaluate_many,
    factorize,
    finite_diff_gradient,
)


@pytest.fixture
def capacity():
    return BlackBoxFunction.capacity(10.0, 6)


@pytest.fixture
def quadratic():
    Q = [[2.0, 0.5, 0.0], [0.5, 1.0, -0.3], [0.0, -0.3, 3.0]]
    return BlackBoxFunction.quadratic(Q, [1.0, -1.0, 0.5])


def test_capacity_value_and_gradient(capacity):
    x = np.ones(6)

    assert evaluate(capacity, x) == pytest.approx(0.25)
    assert np.allclose(analytic_gradient(capacity, x), 0.0625, rtol=0, atol=1e-15)


def test_capacity_pole_is_a_domain_error(capacity):
    with pytest.raises(DomainError):
        evaluate(capacity, np.array([2.0, 2.0, 2.0, 2.0, 1.0, 1.0]))
    with pytest.raises(DomainError):
        analytic_gradient(capacity, np.full(6, 2.0))


def test_wrong_dimension_rejected(capacity):
    with pytest.raises(ValueError):
        evaluate(capacity, np.ones(5))


def test_finite_differences_match_analytic(capacity, quadratic):
    x = np.ones(6)
    assert np.allclose(finite_diff_gradient(capacity, x), analytic_gradient(capacity, x), rtol=0, atol=1e-8)

    y = np.array([0.5, -0.2, 1.0])
    assert np.allclose(finite_diff_gradient(quadratic, y), analytic_gradient(quadratic, y), rtol=0, atol=1e-8)


def test_linear_gradient_is_c():
    f = BlackBoxFunction.linear([1.0, 2.0, -3.0])

    assert analytic_gradient(f, np.zeros(3)).tolist() == [1.0, 2.0, -3.0]


@pytest.mark.parametrize("kind", ["capacity", "linear", "quadratic"])
def test_factorization_reproduces_gradient(kind, quadratic):
    if kind == "capacity":
        f, x = BlackBoxFunction.capacity(10.0, 4), np.array([1.0, 0.5, 2.0, 1.5])
    elif kind == "linear":
        f, x = BlackBoxFunction.linear([1.0, 2.0, 3.0]), np.array([4.0, -1.0, 0.0])
    else:
        f, x = quadratic, np.array([0.3, 0.1, -0.7])

    fac = factorize(f)

    assert fac.n == f.n
    assert np.allclose(fac.A @ fac.v_true(x), analytic_gradient(f, x), rtol=0, atol=1e-12)


def test_capacity_factorization_shape():
    fac = factorize(BlackBoxFunction.capacity(10.0, 6))

    assert fac.A.shape == (6, 1)
    assert fac.m == 1
    assert fac.v_true(np.ones(6))[0] == pytest.approx(0.0625)


def test_quadratic_requires_symmetric_q():
    with pytest.raises(ValueError):
        BlackBoxFunction.quadratic([[1.0, 2.0], [0.0, 1.0]])


def test_evaluate_many_matches_pointwise(capacity, quadratic):
    rng = np.random.default_rng(0)
    for f in (capacity, quadratic):
        X = rng.uniform(-0.5, 0.5, size=(8, f.n))
        assert np.allclose(evaluate_many(f, X), [evaluate(f, x) for x in X], rtol=0, atol=1e-14)
