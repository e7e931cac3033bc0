# commands/check.py

import click
import pandas as pd

from commands.common import cli_errors, emit_json
from decode import DEFAULT_DIRECTIONS, condition_table, max_tolerable_q
from scenario import build_scenario
from settings import load_config


@click.command("check")
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False),
              help="YAML or JSON experiment config.")
@click.option("--directions", type=click.IntRange(min=1), default=DEFAULT_DIRECTIONS, show_default=True,
              help="Random test directions when m > 1.")
@click.option("--table", is_flag=True, help="Print the per-q condition table as CSV instead of the JSON report.")
def command(config_path, directions, table):
    """Report how many corrupted rows and blocks the scenario's stacked system tolerates."""
    with cli_errors("check"):
        scenario = build_scenario(load_config(config_path))
        sys = scenario.system
        seed = scenario.config.seed

        if table:
            rows = [
                {"q": r.q, "holds": r.holds, "strict": r.strict, "exact": r.exact, "margin": repr(r.margin)}
                for r in condition_table(sys, n_dir=directions, seed=seed)
            ]
            click.echo(pd.DataFrame(rows).to_csv(index=False, lineterminator="\n"), nl=False)
            return

        tolerance = max_tolerable_q(sys, n_dir=directions, seed=seed)
        nonzero = sys.nonzero
        byzantine_rows = sum(int(nonzero[sys.block_rows(b)].sum()) for b in scenario.byzantine_blocks)
        emit_json({
            "universe_size": len(scenario.universe),
            "rows": sys.rows,
            "nonzero_rows": tolerance.nonzero_rows,
            "m": sys.m,
            "q_max": tolerance.q_max,
            "block_bound": tolerance.block_bound,
            "effective_block_bound": tolerance.effective_block_bound,
            "exact": tolerance.exact,
            "byzantine_blocks": sorted(b + 1 for b in scenario.byzantine_blocks),
            "byzantine_rows": byzantine_rows,
            "byzantine_within_q_max": byzantine_rows <= tolerance.q_max,
            "byzantine_within_block_bound": len(scenario.byzantine_blocks) <= tolerance.effective_block_bound,
        })
