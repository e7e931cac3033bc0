# results/models.py

import math
from dataclasses import asdict, dataclass, fields

METRIC_COLUMNS = ("err_l2", "err_linf", "J", "zhat_err", "naive_err_linf")
TRAJECTORY_COLUMNS = ("k", *METRIC_COLUMNS, "replication")
AGGREGATE_STATS = ("mean", "min", "max")


@dataclass(frozen=True)
class MetricsRecord:
    """
    One snapshot of the estimator taken at iteration k.
    Append-only: a replication's records have strictly increasing k.
    """

    k: int
    err_l2: float
    err_linf: float
    J: float
    zhat_err: float
    naive_err_linf: float
    replication: int = 0

    def __post_init__(self):
        for name in METRIC_COLUMNS:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"metric {name} must be finite, got {value}")


def serialize_record(record: MetricsRecord) -> dict:
    """
    Column-ordered dict for a CSV row.
    Floats use repr so a rerun writes identical bytes.
    """
    row = asdict(record)
    return {name: (repr(float(row[name])) if name in METRIC_COLUMNS else int(row[name]))
            for name in TRAJECTORY_COLUMNS}


def deserialize_record(row: dict) -> MetricsRecord:
    names = {f.name for f in fields(MetricsRecord)}
    return MetricsRecord(**{
        name: int(row[name]) if name in ("k", "replication") else float(row[name])
        for name in names
    })


def aggregate_columns() -> list[str]:
    return ["k", "replications"] + [f"{m}_{s}" for m in METRIC_COLUMNS for s in AGGREGATE_STATS]
