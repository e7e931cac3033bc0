# commands/simulate.py

import click

from commands.common import cli_errors, emit_json
from harness import run_experiment
from settings import load_config, with_override


@click.command("simulate")
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False),
              help="YAML or JSON experiment config.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Output directory (overrides output.dir).")
@click.option("--seed", type=int, default=None, help="Base seed (overrides seed).")
def command(config_path, out_dir, seed):
    """Run every replication of one experiment and write CSV trajectories."""
    with cli_errors("simulate"):
        config = load_config(config_path)
        if seed is not None:
            config = with_override(config, "seed", seed)
        result = run_experiment(config, out_dir=out_dir)
        terminal = result.terminal("err_linf")
        emit_json({
            "config_hash": result.config_hash,
            "directory": str(result.directory),
            "replications": len(result.trajectories),
            "terminal_err_linf_mean": float(terminal.mean()) if len(terminal) else None,
        })
