# results/sink.py

from results.models import MetricsRecord
from results.store import TrajectoryStore

METRICS_TOPIC = "estimator.metrics"


class MetricsSink:
    """
    Subscribes to estimator metric events and records them.
    """

    def __init__(self, store: TrajectoryStore, replication: int | None = None):
        self.store = store
        self.replication = replication

    def on_event(self, topic: str, payload: dict) -> None:
        record = self._normalize(topic, payload)
        if record:
            self.store.append(record)

    def _normalize(self, topic: str, payload: dict) -> MetricsRecord | None:
        """
        Convert a bus payload into a MetricsRecord.
        Events for another replication are ignored when the sink is bound to one.
        """
        if topic != METRICS_TOPIC:
            return None
        replication = int(payload.get("replication", 0))
        if self.replication is not None and replication != self.replication:
            return None
        return MetricsRecord(
            k=int(payload["k"]),
            err_l2=float(payload["err_l2"]),
            err_linf=float(payload["err_linf"]),
            J=float(payload["J"]),
            zhat_err=float(payload["zhat_err"]),
            naive_err_linf=float(payload["naive_err_linf"]),
            replication=replication,
        )
