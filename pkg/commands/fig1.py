# commands/fig1.py

import click

from commands.common import cli_errors, emit_json
from harness import run_fig1


@click.command("fig1")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="runs/fig1", show_default=True)
@click.option("--iterations", type=click.IntRange(min=0), default=200_000, show_default=True)
@click.option("--replications", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def command(out_dir, iterations, replications, seed):
    """Run the four honest/Byzantine × single/simultaneous panels and write summary.json."""
    with cli_errors("fig1"):
        emit_json(run_fig1(out_dir, iterations=iterations, replications=replications, seed=seed))
