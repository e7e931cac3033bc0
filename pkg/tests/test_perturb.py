# tests/test_perturb.py

import numpy as np
import pytest

from errors import DomainError, EnumerationLimitError
from model import ActivationVector, NodePartition, build_universe
from oracle import BlackBoxFunction, analytic_gradient
from perturb import (
    ConstantOffset,
    Gaussian,
    Obedient,
    SignFlipScaled,
    expected_observation,
    make_strategy,
    run_round,
)


@pytest.fixture
def linear2():
    return BlackBoxFunction.linear([1.0, 2.0])


def test_honest_linear_round(linear2, fixed_signs):
    rnd = run_round(np.zeros(2), ActivationVector((1, 1)), 0.1, NodePartition(2), None, linear2,
                    fixed_signs([1, 1]))

    # diff = 0.1·1 + 0.1·2 = 0.3, divided by δΔᵢ = 0.1 for both nodes
    assert rnd.delta_tilde.tolist() == [1.0, 1.0]
    assert rnd.z == pytest.approx([3.0, 3.0])
    assert rnd.f_perturbed - rnd.f_base == pytest.approx(0.3)


def test_inactive_node_reports_zero(linear2, fixed_signs):
    rnd = run_round(np.zeros(2), ActivationVector((1, 0)), 0.1, NodePartition(2), None, linear2,
                    fixed_signs([-1, 1]))

    assert rnd.delta_tilde.tolist() == [-1.0, 0.0]
    assert rnd.z[1] == 0.0
    assert rnd.z[0] == pytest.approx(1.0)


def test_constant_offset_shifts_good_observation(linear2, fixed_signs):
    u = ActivationVector((1, 1))
    partition = NodePartition.from_ids(2, [2])
    honest = run_round(np.zeros(2), u, 0.1, partition, {1: Obedient()}, linear2, fixed_signs([1, 1]))
    attacked = run_round(np.zeros(2), u, 0.1, partition, {1: ConstantOffset(M=10)}, linear2, fixed_signs([1, 1]))

    # shift = c_b·(10 − Δ_b)/Δ_good = 2·9
    assert attacked.z[0] - honest.z[0] == pytest.approx(18.0)
    assert attacked.delta_tilde[1] == 10.0
    # own report: (0.1·1 + 0.1·2·10) / (0.1·10)
    assert attacked.z[1] == pytest.approx(2.1)


def test_report_only_keeps_play_honest(linear2, fixed_signs):
    partition = NodePartition.from_ids(2, [2])
    strategy = ConstantOffset(M=10, report_only=True)
    rnd = run_round(np.zeros(2), ActivationVector((1, 1)), 0.1, partition, {1: strategy}, linear2,
                    fixed_signs([1, 1]))

    assert rnd.delta_tilde.tolist() == [1.0, 1.0]
    assert rnd.z[0] == pytest.approx(3.0)
    assert rnd.z[1] == pytest.approx(3.0 + 10.0)


def test_zero_play_uses_floor_for_own_report(linear2, fixed_signs):
    partition = NodePartition.from_ids(2, [2])
    rnd = run_round(np.zeros(2), ActivationVector((1, 1)), 0.1, partition, {1: SignFlipScaled(s=0.0)},
                    linear2, fixed_signs([1, 1]))

    assert rnd.delta_tilde[1] == 0.0
    assert rnd.z[0] == pytest.approx(1.0)
    assert rnd.z[1] == pytest.approx(0.1 / (0.1 * 1e-6))


def test_gaussian_strategy_uses_noise(linear2, fixed_signs):
    partition = NodePartition.from_ids(2, [2])
    rnd = run_round(np.zeros(2), ActivationVector((0, 1)), 0.1, partition, {1: Gaussian(sigma=2.0)}, linear2,
                    fixed_signs([1, -1], noise=[0.0, 0.5]))

    assert rnd.delta_tilde[1] == pytest.approx(-1.0 + 2.0 * 0.5)


def test_rounds_are_seed_deterministic():
    f = BlackBoxFunction.capacity(10.0, 6)
    u = ActivationVector((1, 0, 1, 1, 0, 1))
    partition = NodePartition.from_ids(6, [6])
    strategies = {5: make_strategy("gaussian", sigma=1.0)}

    a = [run_round(np.ones(6), u, 0.01, partition, strategies, f, rng).z
         for rng in [np.random.default_rng(9)] for _ in range(5)]
    b = [run_round(np.ones(6), u, 0.01, partition, strategies, f, rng).z
         for rng in [np.random.default_rng(9)] for _ in range(5)]

    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_pole_aborts_round(fixed_signs):
    f = BlackBoxFunction.capacity(6.05, 6)
    with pytest.raises(DomainError):
        run_round(np.ones(6), ActivationVector((1,) * 6), 0.01, NodePartition(6), None, f,
                  fixed_signs([1] * 6))


def test_nonpositive_delta_rejected(linear2):
    with pytest.raises(ValueError):
        run_round(np.zeros(2), ActivationVector((1, 1)), 0.0, NodePartition(2), None, linear2,
                  np.random.default_rng(0))


def test_unknown_strategy():
    with pytest.raises(ValueError):
        make_strategy("mimic")


def test_expected_observation_linear_is_exact(linear2):
    for delta in (0.5, 0.01):
        zbar = expected_observation(np.zeros(2), ActivationVector((1, 1)), delta, NodePartition(2), None, linear2)
        assert np.allclose(zbar, [1.0, 2.0], rtol=0, atol=1e-12)


def test_expected_observation_capacity_singleton():
    f = BlackBoxFunction.capacity(10.0, 6)
    zbar = expected_observation(np.ones(6), ActivationVector.of([0], 6), 1e-3, NodePartition(6), None, f)

    assert abs(zbar[0] - 0.0625) < 1e-4
    assert np.all(zbar[1:] == 0.0)


def test_expected_observation_bias_is_order_delta():
    f = BlackBoxFunction.capacity(10.0, 6)
    x = np.ones(6)
    grad = analytic_gradient(f, x)
    for u in build_universe("all_nonempty_subsets", 6):
        zbar = expected_observation(x, u, 0.01, NodePartition(6), None, f)
        active = list(u.active)
        assert np.max(np.abs(zbar[active] - grad[active])) <= 0.05 * 0.01


def test_expected_observation_enumeration_limit():
    f = BlackBoxFunction.linear(np.ones(21))
    with pytest.raises(EnumerationLimitError):
        expected_observation(np.zeros(21), ActivationVector((1,) * 21), 0.01, NodePartition(21), None, f)


def test_enumeration_limit_counts_byzantine_nodes():
    f = BlackBoxFunction.linear(np.ones(21))
    partition = NodePartition(21, frozenset({20}))
    strategies = {20: ConstantOffset(M=10.0)}
    with pytest.raises(EnumerationLimitError):
        expected_observation(np.zeros(21), ActivationVector((1,) * 21), 0.01, partition, strategies, f)


def test_mean_of_rounds_approaches_expectation():
    f = BlackBoxFunction.capacity(10.0, 4)
    u = ActivationVector((1, 1, 0, 1))
    partition = NodePartition.from_ids(4, [4])
    strategies = {3: ConstantOffset(M=3.0)}
    rng = np.random.default_rng(4)

    samples = np.array([run_round(np.ones(4), u, 0.01, partition, strategies, f, rng).z for _ in range(20000)])
    exact = expected_observation(np.ones(4), u, 0.01, partition, strategies, f)

    assert np.allclose(samples.mean(axis=0), exact, rtol=0, atol=6e-3)
