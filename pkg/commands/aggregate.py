# commands/aggregate.py

import click

from commands.common import cli_errors, emit_json
from results.query import AGGREGATE_FILE, aggregate_directory


@click.command("aggregate")
@click.option("--dir", "directory", required=True, type=click.Path(file_okay=False, exists=True))
def command(directory):
    """Rebuild aggregate.csv from a run directory, rejecting files from another config."""
    with cli_errors("aggregate"):
        frame = aggregate_directory(directory)
        emit_json({"directory": directory, "file": AGGREGATE_FILE, "rows": len(frame)})
