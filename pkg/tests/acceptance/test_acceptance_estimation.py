# tests/acceptance/test_acceptance_estimation.py
"""
End-to-end properties of the estimator, the activation chain and the
experiment harness. Slow: deselect with `-m "not acceptance"`.
"""

import numpy as np
import pytest

from activation import make_chain, occupation_frequencies, stationary_distribution, total_variation
from estimator import run_estimation
from harness import fig1_scenarios, run_experiment, run_fig1, summarize_fig1
from model import build_universe
from settings import with_override

pytestmark = pytest.mark.acceptance

GRADIENT_LINF = 0.0625


@pytest.fixture(scope="module")
def single_panels():
    """Singleton honest and Byzantine panels at full length, kept in memory."""
    honest, _, attacked, _ = fig1_scenarios(iterations=200_000, replications=10, seed=0)
    return {
        "single_honest": run_experiment(honest, write=False),
        "single_byzantine": run_experiment(attacked, write=False),
    }


def test_honest_singleton_run_converges(single_panels):
    terminal = single_panels["single_honest"].terminal("err_linf")

    assert len(terminal) == 10
    assert terminal.mean() <= 0.05 * GRADIENT_LINF


def test_robust_estimate_beats_naive_under_attack(single_panels):
    result = single_panels["single_byzantine"]
    robust = result.terminal("err_linf")
    naive = result.terminal("naive_err_linf")

    assert int((robust < naive).sum()) >= 9


def test_byzantine_presence_raises_the_error(single_panels):
    _, honest, _, attacked = fig1_scenarios(iterations=200_000, replications=3, seed=0, metrics_stride=20_000)
    results = dict(single_panels)
    results["simultaneous_honest"] = run_experiment(honest, write=False)
    results["simultaneous_byzantine"] = run_experiment(attacked, write=False)

    summary = summarize_fig1(results)
    checks = summary["checks"]

    assert checks["byzantine_incidence"]["simultaneous"] is True
    assert checks["byzantine_incidence_aggregate"] is True
    assert checks["robust_below_naive"]["single"] is True
    # singletons keep corruption on the two Byzantine rows, which the median discards
    assert summary["panels"]["single_byzantine"]["terminal_err_linf_mean"] <= 0.05 * GRADIENT_LINF


def test_fast_timescale_tracks_block_means():
    config = with_override(fig1_scenarios(replications=1)[0], "run", {
        "iterations": 100_000, "metrics_stride": 100_000, "replications": 1, "freeze_v": True,
    })
    trajectory = run_estimation(None, config)

    assert trajectory.final.zhat_err <= 5e-3
    assert np.array_equal(trajectory.state.v, np.zeros(1))


@pytest.mark.parametrize("mode, P", [
    ("iid_uniform", None),
    ("custom", [[0.5, 0.5, 0.0], [0.2, 0.3, 0.5], [0.4, 0.0, 0.6]]),
])
def test_occupation_matches_stationary_distribution(mode, P):
    universe = build_universe("singletons", 6 if P is None else 3)
    chain = make_chain(universe, mode, P=P, seed=0)

    frequencies = occupation_frequencies(chain, 100_000)

    assert total_variation(frequencies, stationary_distribution(chain.P)) < 0.01


def test_fig1_reruns_are_byte_identical(tmp_path):
    first = run_fig1(tmp_path / "a", iterations=2000, replications=2, seed=5)
    second = run_fig1(tmp_path / "b", iterations=2000, replications=2, seed=5)

    assert first == second
    files_a = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*") if p.is_file())
    assert files_a == files_b
    assert len([p for p in files_a if p.name.startswith("replication_")]) == 4 * 2
    for rel in files_a:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()
