# tests/test_decode.py

import numpy as np
import pytest

from decode import (
    CorruptionModel,
    build_A1,
    check_recoverability,
    condition_table,
    decode_enumerate,
    decode_subgradient,
    decode_subgradient_batch,
    decode_weighted_median,
    max_tolerable_q,
    objective_J,
    stacked_from_rows,
)
from errors import EnumerationLimitError, UnderdeterminedError
from model import build_universe


def _two_singletons():
    return build_universe("custom", 2, custom=[[1, 0], [0, 1]])


# ------------------------------------------------------------------------------
# Construction and objective
# ------------------------------------------------------------------------------
def test_build_A1_masks_inactive_rows():
    sys = build_A1(_two_singletons(), np.ones((2, 1)))

    assert sys.A1[:, 0].tolist() == [1.0, 0.0, 0.0, 1.0]
    assert sys.row_map == ((0, 0), (0, 1), (1, 0), (1, 1))


def test_build_A1_full_activation_is_A():
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    sys = build_A1(build_universe("custom", 2, custom=[[1, 1]]), A)

    assert np.array_equal(sys.A1, A)


def test_build_A1_singletons_six():
    sys = build_A1(build_universe("singletons", 6), np.ones((6, 1)))

    assert sys.A1.shape == (36, 1)
    assert sorted(np.flatnonzero(sys.A1[:, 0]).tolist()) == [j * 6 + j for j in range(6)]


def test_build_A1_dimension_mismatch():
    with pytest.raises(ValueError):
        build_A1(_two_singletons(), np.ones((3, 1)))


def test_objective_J_examples():
    sys = build_A1(_two_singletons(), np.ones((2, 1)))

    assert objective_J(sys, [1.0, 0.0, 0.0, 3.0], [2.0]) == pytest.approx(2.0)
    assert objective_J(sys, sys.A1 @ np.array([0.7]), [0.7]) == 0.0
    assert objective_J(sys, [1.0, -2.0, 0.5, 3.0], [0.0]) == pytest.approx(6.5)


def test_objective_J_is_convex():
    rng = np.random.default_rng(1)
    sys = stacked_from_rows(rng.standard_normal((10, 2)))
    zbar = rng.standard_normal(10)
    for _ in range(50):
        v1, v2, lam = rng.standard_normal(2), rng.standard_normal(2), rng.uniform()
        left = objective_J(sys, zbar, lam * v1 + (1 - lam) * v2)
        right = lam * objective_J(sys, zbar, v1) + (1 - lam) * objective_J(sys, zbar, v2)
        assert left <= right + 1e-12


def test_corruption_model_is_block_constant():
    sys = build_A1(build_universe("singletons", 3), np.ones((3, 1)))
    e = CorruptionModel(frozenset({2}), {2: 0.5}).vector(sys)

    assert e.tolist() == [0.0] * 6 + [0.5] * 3


# ------------------------------------------------------------------------------
# Decoders
# ------------------------------------------------------------------------------
def test_weighted_median_rejects_outlier():
    sys = stacked_from_rows(np.ones((4, 1)))

    assert decode_weighted_median(sys, [2.0, 2.0, 9.0, 2.0])[0] == 2.0
    assert decode_enumerate(sys, [2.0, 2.0, 9.0, 2.0])[0] == 2.0


def test_weighted_median_single_row():
    assert decode_weighted_median(stacked_from_rows([[1.0]]), [5.0])[0] == 5.0


def test_weighted_median_lower_tie():
    sys = stacked_from_rows(np.ones((2, 1)))

    assert decode_weighted_median(sys, [1.0, 3.0])[0] == 1.0
    assert decode_enumerate(sys, [1.0, 3.0])[0] == 1.0


def test_weighted_median_ignores_zero_rows():
    sys = build_A1(_two_singletons(), np.ones((2, 1)))
    base = decode_weighted_median(sys, [4.0, 0.0, 0.0, 6.0])
    moved = decode_weighted_median(sys, [4.0, 100.0, -50.0, 6.0])

    assert np.array_equal(base, moved)
    assert objective_J(sys, [4.0, 100.0, -50.0, 6.0], base) - objective_J(sys, [4.0, 0.0, 0.0, 6.0], base) \
        == pytest.approx(150.0)


def test_weighted_median_needs_m_one_and_a_row():
    with pytest.raises(ValueError):
        decode_weighted_median(stacked_from_rows(np.ones((3, 2))), np.zeros(3))
    with pytest.raises(UnderdeterminedError):
        decode_weighted_median(stacked_from_rows(np.zeros((3, 1))), np.zeros(3))


def test_enumerate_recovers_clean_system():
    rng = np.random.default_rng(3)
    sys = stacked_from_rows(rng.standard_normal((9, 3)))
    v_true = np.array([0.5, -1.0, 2.0])

    assert np.allclose(decode_enumerate(sys, sys.A1 @ v_true), v_true, rtol=0, atol=1e-10)


def test_enumerate_recovers_planted_m2():
    rng = np.random.default_rng(21)
    for _ in range(20):
        sys = stacked_from_rows(rng.standard_normal((12, 2)))
        report = check_recoverability(sys, 2)
        if report.strict and report.margin > 0.1:
            break
    v_true = np.array([1.5, -0.5])
    zbar = sys.A1 @ v_true
    zbar[[3, 8]] += [7.0, -4.0]

    assert np.allclose(decode_enumerate(sys, zbar), v_true, rtol=0, atol=1e-9)


def test_enumerate_rank_and_size_limits():
    with pytest.raises(UnderdeterminedError):
        decode_enumerate(stacked_from_rows([[1.0, 1.0], [2.0, 2.0]]), np.zeros(2))
    with pytest.raises(EnumerationLimitError):
        decode_enumerate(stacked_from_rows(np.ones((65, 1))), np.zeros(65))


def test_subgradient_fixed_point():
    sys = stacked_from_rows(np.array([[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]]))
    v_star = np.array([0.3, -0.2])
    result = decode_subgradient(sys, sys.A1 @ v_star, v0=v_star, iters=50)

    assert np.array_equal(result.v, v_star)
    assert result.J == 0.0


def test_subgradient_outlier_instance():
    sys = stacked_from_rows(np.ones((4, 1)))
    zbar = [2.0, 2.0, 9.0, 2.0]
    result = decode_subgradient(sys, zbar, a0=1.0, step_exponent=0.9, iters=10_000)

    assert abs(result.v[0] - 2.0) < 1e-2
    assert result.J_best <= objective_J(sys, zbar, [0.0])
    assert result.iterations == 10_000


def test_subgradient_rejects_zero_iterations():
    with pytest.raises(ValueError):
        decode_subgradient(stacked_from_rows([[1.0]]), [1.0], iters=0)


def test_batch_matches_one_at_a_time():
    systems = [stacked_from_rows(np.ones((4, 1))), build_A1(_two_singletons(), np.ones((2, 1)))]
    zbars = [np.array([2.0, 2.0, 9.0, 2.0]), np.array([0.5, 0.0, 0.0, 0.7])]

    batch = decode_subgradient_batch(systems, zbars, iters=2000)

    for sys, zbar, got in zip(systems, zbars, batch):
        single = decode_subgradient(sys, zbar, iters=2000)
        assert np.array_equal(got.v, single.v)
        assert np.allclose(got.v_best, single.v_best, atol=1e-12)
        assert got.J_best == pytest.approx(single.J_best)


def test_batch_rejects_mixed_m():
    with pytest.raises(ValueError):
        decode_subgradient_batch(
            [stacked_from_rows([[1.0]]), stacked_from_rows([[1.0, 0.0], [0.0, 1.0]])],
            [[1.0], [1.0, 1.0]],
        )


def test_large_values_on_inert_rows_do_not_move_any_decoder():
    sys = build_A1(build_universe("custom", 2, custom=[[1, 0], [1, 1]]), np.ones((2, 1)))
    zbar = np.array([1.0, 0.0, 1.0001, 1.0002])
    loud = zbar.copy()
    loud[1] = 1e9

    assert decode_enumerate(sys, zbar).tolist() == [1.0001]
    assert decode_enumerate(sys, loud).tolist() == [1.0001]
    assert decode_weighted_median(sys, loud).tolist() == decode_weighted_median(sys, zbar).tolist() == [1.0001]
    quiet_run = decode_subgradient(sys, zbar, iters=3000)
    loud_run = decode_subgradient(sys, loud, iters=3000)
    assert np.array_equal(loud_run.v_best, quiet_run.v_best)
    assert loud_run.J_best == pytest.approx(quiet_run.J_best + 1e9)


# ------------------------------------------------------------------------------
# Recoverability
# ------------------------------------------------------------------------------
@pytest.mark.parametrize("q, holds, strict", [(2, True, True), (3, True, False), (4, False, False)])
def test_check_recoverability_six_unit_rows(q, holds, strict):
    report = check_recoverability(stacked_from_rows(np.ones((6, 1))), q)

    assert report.holds is holds
    assert report.strict is strict
    assert report.exact is True


def test_check_recoverability_q_range():
    sys = build_A1(_two_singletons(), np.ones((2, 1)))
    with pytest.raises(ValueError):
        check_recoverability(sys, 3)
    with pytest.raises(ValueError):
        check_recoverability(sys, -1)


def test_check_recoverability_m2_is_flagged_heuristic():
    rng = np.random.default_rng(0)
    report = check_recoverability(stacked_from_rows(rng.standard_normal((10, 2))), 1, n_dir=256)

    assert report.exact is False
    assert report.directions == 256 + 2 + 10


def test_max_tolerable_q_singletons():
    tolerance = max_tolerable_q(build_A1(build_universe("singletons", 6), np.ones((6, 1))))

    assert tolerance.q_max == 3
    assert tolerance.block_bound == 0
    assert tolerance.effective_block_bound == 3
    assert tolerance.nonzero_rows == 6


def test_max_tolerable_q_single_informative_row():
    sys = build_A1(build_universe("custom", 2, custom=[[1, 0]]), np.ones((2, 1)))

    assert max_tolerable_q(sys).q_max == 0


def test_max_tolerable_q_full_activation():
    sys = build_A1(build_universe("custom", 2, custom=[[1, 1]]), np.ones((2, 1)))

    assert max_tolerable_q(sys).q_max == 1


def test_condition_table_is_monotone():
    rng = np.random.default_rng(5)
    table = condition_table(stacked_from_rows(rng.uniform(0.1, 2.0, size=(8, 1))))
    holds = [r.holds for r in table]

    assert [r.q for r in table] == list(range(9))
    assert holds == sorted(holds, reverse=True)
    assert holds[0] is True
