# results/query.py

import json
from pathlib import Path
from typing import Iterable, List

import pandas as pd

from errors import HashMismatchError
from logger import get_logger
from results.csv_store import read_hash_line, read_trajectory_frame, write_hash_line
from results.models import (
    AGGREGATE_STATS,
    METRIC_COLUMNS,
    TRAJECTORY_COLUMNS,
    MetricsRecord,
    aggregate_columns,
)
from results.store import TrajectoryStore

log = get_logger("BYZGRAD.Results")

CONFIG_FILE = "config.json"
AGGREGATE_FILE = "aggregate.csv"
REPLICATION_GLOB = "replication_*.csv"


def replication_filename(replication: int) -> str:
    return f"replication_{replication:02d}.csv"


def records_frame(records: Iterable[MetricsRecord]) -> pd.DataFrame:
    rows = [{name: getattr(r, name) for name in TRAJECTORY_COLUMNS} for r in records]
    return pd.DataFrame(rows, columns=list(TRAJECTORY_COLUMNS))


def get_trajectory(store: TrajectoryStore, replication: int) -> List[MetricsRecord]:
    """
    Records of one replication in increasing k.

    Guarantees:
    - Deterministic ordering by k
    - Read-only
    """
    return sorted((r for r in store.all() if r.replication == replication), key=lambda r: r.k)


def aggregate_frame(frame: pd.DataFrame) -> pd.DataFrame:
    """
    Mean/min/max of every metric across replications at each recorded k.

    Guarantees:
    - One row per distinct k, ordered by k
    - Mean is the arithmetic mean of the replication values at that k
    - Independent of the order replications finished in
    """
    if frame.empty:
        return pd.DataFrame(columns=aggregate_columns())
    ordered = frame.sort_values(["k", "replication"], kind="mergesort")
    grouped = ordered.groupby("k", sort=True)
    out = pd.DataFrame({"k": grouped.size().index.astype(int), "replications": grouped.size().values})
    for metric in METRIC_COLUMNS:
        stats = grouped[metric].agg(list(AGGREGATE_STATS))
        for stat in AGGREGATE_STATS:
            out[f"{metric}_{stat}"] = stats[stat].values
    return out[aggregate_columns()].reset_index(drop=True)


def terminal_values(frame: pd.DataFrame, metric: str) -> pd.Series:
    """Last recorded value of `metric` per replication, indexed by replication."""
    last = frame.sort_values("k", kind="mergesort").groupby("replication", sort=True).tail(1)
    return last.set_index("replication")[metric].sort_index()


def write_aggregate_csv(path: str | Path, config_hash: str, frame: pd.DataFrame) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        write_hash_line(handle, config_hash)
        formatted = frame.copy()
        for column in formatted.columns:
            if column not in ("k", "replications"):
                formatted[column] = [repr(float(v)) for v in formatted[column]]
        formatted.to_csv(handle, index=False, lineterminator="\n")
    return path


def aggregate_directory(directory: str | Path) -> pd.DataFrame:
    """
    Recompute aggregate.csv from the replication files of one run directory.

    Guarantees:
    - Every replication file carries the hash recorded in config.json
    - aggregate.csv is rewritten from the files, never trusted

    Raises:
        HashMismatchError: a file was produced from a different config
        FileNotFoundError: config.json or replication files are missing
    """
    directory = Path(directory)
    meta = json.loads((directory / CONFIG_FILE).read_text(encoding="utf-8"))
    expected = meta["config_hash"]
    paths = sorted(directory.glob(REPLICATION_GLOB))
    if not paths:
        raise FileNotFoundError(f"no {REPLICATION_GLOB} files in {directory}")

    frames = [read_trajectory_frame(p, expected)[1] for p in paths]
    aggregate_path = directory / AGGREGATE_FILE
    if aggregate_path.exists() and read_hash_line(aggregate_path) != expected:
        raise HashMismatchError(f"{aggregate_path}: config hash does not match {CONFIG_FILE}")

    frame = aggregate_frame(pd.concat(frames, ignore_index=True))
    write_aggregate_csv(aggregate_path, expected, frame)
    log.info("aggregate_rewritten", directory=str(directory), replications=len(paths), rows=len(frame))
    return frame
