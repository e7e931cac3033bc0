# harness.py: experiments: replications, aggregation, scenario panels, sweeps

"""
Experiment harness
------------------
A run directory holds

    config.json            the validated config and its hash
    replication_XX.csv     one trajectory per replication, streamed while it runs
    aggregate.csv          mean/min/max of every metric at each recorded k

Replications run on a thread pool capped by BYZGRAD_THREADS. Each owns its
own chain, random streams and output file, so completion order never
changes a byte of output.
"""

from __future__ import annotations

import json
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
import pandas as pd

from bus import EventBus
from errors import ConfigError
from estimator import NaiveAccumulator, Trajectory, run_estimation
from logger import get_logger
from perturb import PerturbationRound
from results.csv_store import CSVTrajectoryStore
from results.query import (
    AGGREGATE_FILE,
    CONFIG_FILE,
    aggregate_frame,
    records_frame,
    replication_filename,
    terminal_values,
    write_aggregate_csv,
)
from results.sink import METRICS_TOPIC, MetricsSink
from results.store import InMemoryTrajectoryStore, TrajectoryStore
from scenario import Scenario, build_scenario
from settings import ExperimentConfig, config_hash, parse_config, with_override

log = get_logger("BYZGRAD.Harness")

THREADS_ENV = "BYZGRAD_THREADS"
SUMMARY_FILE = "summary.json"

# ------------------------------------------------------------------------------
# Scenario panel constants
# ------------------------------------------------------------------------------
FIG1_CAPACITY = 10.0
FIG1_NODES = 6
FIG1_BYZANTINE = [5, 6]
FIG1_OFFSET = 10.0


@dataclass(eq=False)
class ExperimentResult:
    config: ExperimentConfig
    config_hash: str
    directory: Path | None
    trajectories: list[Trajectory]
    aggregate: pd.DataFrame

    def frame(self) -> pd.DataFrame:
        return records_frame(r for t in self.trajectories for r in t.records)

    def terminal(self, metric: str = "err_linf") -> pd.Series:
        return terminal_values(self.frame(), metric)


def max_workers() -> int:
    raw = os.getenv(THREADS_ENV, "1")
    try:
        workers = int(raw)
    except ValueError:
        raise ConfigError(THREADS_ENV, f"expected an integer, got {raw!r}") from None
    return max(workers, 1)


def write_config_json(directory: Path, config: ExperimentConfig, digest: str) -> Path:
    path = directory / CONFIG_FILE
    payload = {"config_hash": digest, "config": config.model_dump(mode="json")}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _run_replication(scenario: Scenario, replication: int, directory: Path | None, digest: str) -> Trajectory:
    store: TrajectoryStore
    if directory is None:
        store = InMemoryTrajectoryStore()
    else:
        store = CSVTrajectoryStore(directory / replication_filename(replication), digest)

    bus = EventBus()
    bus.add_handler(METRICS_TOPIC, MetricsSink(store, replication).on_event)
    try:
        return run_estimation(None, scenario, replication=replication, bus=bus)
    finally:
        if isinstance(store, CSVTrajectoryStore):
            store.close()


def run_experiment(config: ExperimentConfig, *, out_dir: str | Path | None = None,
                   write: bool = True) -> ExperimentResult:
    """
    Run every replication of `config` and aggregate them per recorded k.

    `out_dir` overrides output.dir; `write=False` keeps everything in memory.

    Raises:
        ConfigError: the config describes an impossible scenario
        OSError: the output directory cannot be created or written
    """
    scenario = build_scenario(config)
    digest = config_hash(config)
    directory = None
    if write:
        directory = Path(out_dir if out_dir is not None else config.output.dir)
        directory.mkdir(parents=True, exist_ok=True)
        write_config_json(directory, config, digest)

    replications = config.run.replications
    workers = min(max_workers(), replications)
    log.info("experiment_started", name=config.name, config_hash=digest, replications=replications,
             workers=workers, directory=None if directory is None else str(directory))

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_replication, scenario, r, directory, digest) for r in range(replications)]
        trajectories = [future.result() for future in futures]

    frame = aggregate_frame(records_frame(r for t in trajectories for r in t.records))
    if directory is not None:
        write_aggregate_csv(directory / AGGREGATE_FILE, digest, frame)

    log.info("experiment_finished", name=config.name, config_hash=digest, rows=len(frame))
    return ExperimentResult(config=config, config_hash=digest, directory=directory,
                            trajectories=trajectories, aggregate=frame)


def naive_estimate(rounds: Iterable[PerturbationRound]) -> np.ndarray:
    """
    Per-node average of zᵢ over the rounds where node i was active.
    A node that was never active comes back as NaN.
    """
    accumulator = None
    for rnd in rounds:
        if accumulator is None:
            accumulator = NaiveAccumulator(rnd.u.n)
        accumulator.update(rnd)
    if accumulator is None:
        raise ValueError("naive estimate of zero rounds is undefined")
    missing = accumulator.missing()
    if missing:
        log.warning("naive_estimate_missing_nodes", nodes=[i + 1 for i in missing])
    return accumulator.estimate()


# ==============================================================================
#  Four-panel scenario reproduction
# ==============================================================================
def fig1_scenarios(*, iterations: int = 200_000, replications: int = 10, seed: int = 0,
                   metrics_stride: int = 1000) -> list[ExperimentConfig]:
    """
    Capacity function, six nodes, x = 1.

        single_honest            singletons,            no Byzantine nodes
        simultaneous_honest      all nonempty subsets,  no Byzantine nodes
        single_byzantine         singletons,            nodes 5 and 6 play constant offset 10
        simultaneous_byzantine   all nonempty subsets,  nodes 5 and 6 play constant offset 10
    """
    panels = []
    for attack in (False, True):
        for mode, scheme in (("singletons", "single"), ("all_nonempty_subsets", "simultaneous")):
            panels.append(parse_config({
                "name": f"{scheme}_{'byzantine' if attack else 'honest'}",
                "nodes": FIG1_NODES,
                "function": {"kind": "capacity", "C": FIG1_CAPACITY, "x": [1.0] * FIG1_NODES},
                "universe": {"mode": mode},
                "byzantine": {
                    "ids": FIG1_BYZANTINE if attack else [],
                    "strategy": "constant_offset",
                    "params": {"M": FIG1_OFFSET},
                },
                "run": {"iterations": iterations, "replications": replications, "metrics_stride": metrics_stride},
                "seed": seed,
            }))
    return panels


def _panel_summary(result: ExperimentResult) -> dict:
    robust = result.terminal("err_linf")
    naive = result.terminal("naive_err_linf")
    return {
        "config_hash": result.config_hash,
        "replications": int(len(robust)),
        "terminal_err_linf_mean": float(robust.mean()) if len(robust) else None,
        "terminal_naive_err_linf_mean": float(naive.mean()) if len(naive) else None,
        "robust_below_naive": int((robust < naive).sum()),
    }


def summarize_fig1(results: dict[str, ExperimentResult]) -> dict:
    """
    Terminal errors per panel plus the qualitative ordering checks:
    Byzantine presence does not lower the error (per activation scheme and
    averaged over both), and under attack the robust estimate beats the
    naive per-node average in most replications.
    """
    panels = {name: _panel_summary(result) for name, result in results.items()}
    checks: dict[str, Any] = {"byzantine_incidence": {}, "robust_below_naive": {}}
    honest_total, byzantine_total = [], []
    for scheme in ("single", "simultaneous"):
        honest = panels.get(f"{scheme}_honest")
        attacked = panels.get(f"{scheme}_byzantine")
        if not honest or not attacked or honest["terminal_err_linf_mean"] is None \
                or attacked["terminal_err_linf_mean"] is None:
            continue
        honest_total.append(honest["terminal_err_linf_mean"])
        byzantine_total.append(attacked["terminal_err_linf_mean"])
        checks["byzantine_incidence"][scheme] = honest["terminal_err_linf_mean"] <= attacked["terminal_err_linf_mean"]
        checks["robust_below_naive"][scheme] = attacked["robust_below_naive"] >= 0.9 * attacked["replications"]
    if honest_total:
        checks["byzantine_incidence_aggregate"] = float(np.mean(honest_total)) <= float(np.mean(byzantine_total))
    return {"panels": panels, "checks": checks}


def run_fig1(out_dir: str | Path = "runs/fig1", *, iterations: int = 200_000, replications: int = 10,
             seed: int = 0) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = {}
    for config in fig1_scenarios(iterations=iterations, replications=replications, seed=seed):
        results[config.name] = run_experiment(config, out_dir=out / config.name)
    summary = summarize_fig1(results)
    (out / SUMMARY_FILE).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    log.info("fig1_finished", directory=str(out), checks=summary["checks"])
    return summary


# ==============================================================================
#  Parameter sweeps
# ==============================================================================
def _slug(value: Any) -> str:
    text = json.dumps(value, sort_keys=True, separators=(",", ":"))
    return re.sub(r"[^A-Za-z0-9_.+-]+", "_", text).strip("_") or "value"


def sweep(config: ExperimentConfig, key_path: str, values: Sequence[Any], *,
          out_dir: str | Path | None = None) -> dict:
    """
    One experiment per value of the dotted `key_path`, each in its own
    subdirectory, plus a sweep.json index of terminal errors.

    Raises:
        ConfigError: unknown key or a value the config rejects
    """
    if not values:
        raise ConfigError(key_path, "sweep needs at least one value")
    configs = [with_override(config, key_path, value) for value in values]
    out = Path(out_dir if out_dir is not None else config.output.dir)
    out.mkdir(parents=True, exist_ok=True)

    entries = []
    for value, swept in zip(values, configs):
        directory = out / f"{key_path}={_slug(value)}"
        result = run_experiment(swept, out_dir=directory)
        entry = {"value": value, "directory": directory.name, **_panel_summary(result)}
        entries.append(entry)

    index = {"param": key_path, "runs": entries}
    (out / "sweep.json").write_text(json.dumps(index, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    log.info("sweep_finished", param=key_path, runs=len(entries), directory=str(out))
    return index
