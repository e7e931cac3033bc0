# Ensures local imports (e.g. from decode import build_A1) work
import sys, os
import numpy as np
import pytest

ROOT_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if ROOT_DIR not in sys.path:
    sys.path.insert(0, ROOT_DIR)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: long-running end-to-end property checks")


class FixedSigns:
    """
    Stand-in for a numpy Generator that always draws the given signs.
    Lets a test pin Δ for one round.
    """

    def __init__(self, signs, noise=None):
        self.signs = [int(s) for s in signs]
        self.noise = noise

    def integers(self, low, high, size):
        return np.array([(s + 1) // 2 for s in self.signs][:size])

    def standard_normal(self, size):
        return np.zeros(size) if self.noise is None else np.asarray(self.noise, dtype=float)[:size]


@pytest.fixture
def fixed_signs():
    return FixedSigns


@pytest.fixture(autouse=True)
def isolated_threads(monkeypatch):
    """
    Pin replication parallelism so results never depend on the
    developer's environment.
    """
    monkeypatch.delenv("BYZGRAD_THREADS", raising=False)
    yield


@pytest.fixture
def small_config(tmp_path):
    from settings import parse_config

    return parse_config({
        "name": "small",
        "nodes": 6,
        "universe": {"mode": "singletons"},
        "byzantine": {"ids": [5, 6], "strategy": "constant_offset", "params": {"M": 10.0}},
        "run": {"iterations": 3000, "metrics_stride": 1000, "replications": 2},
        "seed": 3,
        "output": {"dir": str(tmp_path / "out")},
    })


@pytest.fixture
def write_yaml(tmp_path):
    import yaml

    def _write(name, data):
        path = tmp_path / name
        path.write_text(yaml.safe_dump(data, sort_keys=False), encoding="utf-8")
        return path

    return _write
