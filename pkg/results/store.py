# results/store.py

from abc import ABC, abstractmethod
from typing import List

from results.models import MetricsRecord


class TrajectoryStore(ABC):

    @abstractmethod
    def append(self, record: MetricsRecord) -> None:
        """
        Persist one metrics record.
        Append-only; k must increase within a replication.
        """
        raise NotImplementedError

    @abstractmethod
    def all(self) -> List[MetricsRecord]:
        """
        Return every record in append order.
        Read-only view.
        """
        raise NotImplementedError


def _check_order(last_k: dict[int, int], record: MetricsRecord) -> None:
    previous = last_k.get(record.replication)
    if previous is not None and record.k <= previous:
        raise ValueError(
            f"replication {record.replication}: k must increase, got {record.k} after {previous}"
        )
    last_k[record.replication] = record.k


class InMemoryTrajectoryStore(TrajectoryStore):
    def __init__(self):
        self._records: list[MetricsRecord] = []
        self._last_k: dict[int, int] = {}

    def append(self, record: MetricsRecord) -> None:
        _check_order(self._last_k, record)
        self._records.append(record)

    def all(self) -> list[MetricsRecord]:
        return list(self._records)
