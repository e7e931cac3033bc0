# results/csv_store.py: trajectory CSV files with a provenance header

"""
File layout
-----------
    # config_hash=<sha256 hex>
    k,err_l2,err_linf,J,zhat_err,naive_err_linf,replication
    1000,0.0012,...

Rows are flushed as they arrive so a long replication can be watched
while it runs.
"""

import csv
from pathlib import Path
from typing import List

import pandas as pd

from errors import HashMismatchError
from results.models import TRAJECTORY_COLUMNS, MetricsRecord, deserialize_record, serialize_record
from results.store import TrajectoryStore, _check_order

HASH_PREFIX = "# config_hash="


def write_hash_line(handle, config_hash: str) -> None:
    handle.write(f"{HASH_PREFIX}{config_hash}\n")


def read_hash_line(path: str | Path) -> str:
    with open(path, "r", encoding="utf-8") as handle:
        first = handle.readline().rstrip("\n")
    if not first.startswith(HASH_PREFIX):
        raise HashMismatchError(f"{path}: missing '{HASH_PREFIX}' header line")
    return first[len(HASH_PREFIX):]


class CSVTrajectoryStore(TrajectoryStore):
    """
    Streams one replication's records to `path`.
    Also keeps them in memory so `all()` needs no re-read.
    """

    def __init__(self, path: str | Path, config_hash: str):
        self.path = Path(path)
        self.config_hash = config_hash
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = open(self.path, "w", encoding="utf-8", newline="")
        write_hash_line(self._handle, config_hash)
        self._writer = csv.DictWriter(self._handle, fieldnames=list(TRAJECTORY_COLUMNS), lineterminator="\n")
        self._writer.writeheader()
        self._records: list[MetricsRecord] = []
        self._last_k: dict[int, int] = {}

    def append(self, record: MetricsRecord) -> None:
        _check_order(self._last_k, record)
        self._writer.writerow(serialize_record(record))
        self._handle.flush()
        self._records.append(record)

    def all(self) -> List[MetricsRecord]:
        return list(self._records)

    def close(self) -> None:
        if not self._handle.closed:
            self._handle.close()

    def __enter__(self) -> "CSVTrajectoryStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_trajectory_frame(path: str | Path, expected_hash: str | None = None) -> tuple[str, pd.DataFrame]:
    """
    Load a trajectory CSV as a DataFrame together with its config hash.

    Raises:
        HashMismatchError: header missing, or hash differs from `expected_hash`
    """
    found = read_hash_line(path)
    if expected_hash is not None and found != expected_hash:
        raise HashMismatchError(f"{path}: config hash {found[:12]}… does not match {expected_hash[:12]}…")
    frame = pd.read_csv(path, skiprows=1, float_precision="round_trip")
    return found, frame


def read_trajectory(path: str | Path, expected_hash: str | None = None) -> tuple[str, list[MetricsRecord]]:
    found, frame = read_trajectory_frame(path, expected_hash)
    return found, [deserialize_record(row) for row in frame.to_dict(orient="records")]
