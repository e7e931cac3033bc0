# commands/sweep.py

import click
import yaml

from commands.common import cli_errors, emit_json
from harness import sweep
from settings import load_config


def _parse_value(raw: str):
    """YAML scalar parsing: `0.1` → float, `true` → bool, `[1, 2]` → list, else the string."""
    try:
        return yaml.safe_load(raw)
    except yaml.YAMLError:
        return raw


@click.command("sweep")
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.option("--param", "key_path", required=True, help="Dotted config key, e.g. perturb.delta.")
@click.option("--values", "raw_values", required=True, multiple=True,
              help="Value to try; repeat the option or list several after it.")
@click.argument("extra_values", nargs=-1)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
def command(config_path, key_path, raw_values, extra_values, out_dir):
    """Run one experiment per value of a config key."""
    with cli_errors("sweep"):
        values = [_parse_value(v) for v in (*raw_values, *extra_values)]
        emit_json(sweep(load_config(config_path), key_path, values, out_dir=out_dir))
