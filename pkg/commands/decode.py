# commands/decode.py

"""
Decode instance file (YAML or JSON)
-----------------------------------
Either a factorization matrix with a universe,

    A: [[1.0], [1.0]]
    universe: [[1, 0], [0, 1], [1, 1]]
    zbar: [...]                    # |𝒰|·n entries, block-major

or the stacked rows directly,

    A1: [[1.0], [1.0], [1.0], [1.0]]
    zbar: [2.0, 2.0, 9.0, 2.0]

An optional `v_true` adds the recovery error to the output.
"""

from pathlib import Path

import click
import numpy as np
import yaml

from commands.common import cli_errors, emit_json
from decode import (
    StackedSystem,
    build_A1,
    decode_enumerate,
    decode_subgradient,
    decode_weighted_median,
    objective_J,
    stacked_from_rows,
)
from errors import ConfigError
from model import ActivationUniverse, ActivationVector

METHODS = ("auto", "weighted_median", "enumerate", "subgradient")


def load_instance(path) -> tuple[StackedSystem, np.ndarray, np.ndarray | None]:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError("", f"instance file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError("", f"cannot parse {path}: {exc}") from None
    if not isinstance(data, dict) or "zbar" not in data:
        raise ConfigError("zbar", "instance must be a mapping with zbar")

    if "A1" in data:
        sys = stacked_from_rows(data["A1"])
    elif "A" in data and "universe" in data:
        try:
            universe = ActivationUniverse([ActivationVector(tuple(row)) for row in data["universe"]])
            sys = build_A1(universe, data["A"])
        except ValueError as exc:
            raise ConfigError("universe", str(exc)) from None
    else:
        raise ConfigError("A1", "instance needs A1, or A together with universe")

    zbar = np.asarray(data["zbar"], dtype=float)
    if zbar.shape != (sys.rows,):
        raise ConfigError("zbar", f"expected {sys.rows} entries, got {zbar.size}")
    v_true = None if data.get("v_true") is None else np.asarray(data["v_true"], dtype=float)
    return sys, zbar, v_true


@click.command("decode")
@click.option("--instance", "instance_path", required=True, type=click.Path(dir_okay=False))
@click.option("--method", type=click.Choice(METHODS), default="auto", show_default=True,
              help="auto: weighted median for m = 1, enumeration otherwise.")
@click.option("--iters", type=click.IntRange(min=1), default=10_000, show_default=True,
              help="Subgradient iterations.")
def command(instance_path, method, iters):
    """Solve min_v Σ|z̄ − A₁v| for one stored instance."""
    with cli_errors("decode"):
        sys, zbar, v_true = load_instance(instance_path)
        if method == "auto":
            method = "weighted_median" if sys.m == 1 else "enumerate"

        if method == "weighted_median":
            v = decode_weighted_median(sys, zbar)
        elif method == "enumerate":
            v = decode_enumerate(sys, zbar)
        else:
            v = decode_subgradient(sys, zbar, iters=iters).v_best

        out = {"method": method, "v": v.tolist(), "J": objective_J(sys, zbar, v), "rows": sys.rows, "m": sys.m}
        if v_true is not None:
            out["recovery_error"] = float(np.max(np.abs(v - v_true)))
        emit_json(out)
