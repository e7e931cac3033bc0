# main.py: byzgrad command line entry point

"""
    python main.py simulate --config config/singleton_byzantine.yaml --out runs/run1
    python main.py check --config config/singleton_byzantine.yaml
    python main.py decode --instance instance.yaml
    python main.py fig1 --out runs/fig1
    python main.py sweep --config config/singleton_byzantine.yaml --param byzantine.strategy \
        --values constant_offset gaussian sign_flip_scaled
    python main.py aggregate --dir runs/run1

Machine-readable JSON goes to stdout, structured logs to stderr.
Exit codes: 0 success, 2 config error, 1 runtime error.
"""

import sys

import click

from commands import aggregate, check, decode, fig1, simulate, sweep
from logger import get_logger

log = get_logger("BYZGRAD.Main")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def app():
    """Decentralized Byzantine-robust gradient estimation simulator."""


# ------------------------------------------------------------------------------
# Commands
# ------------------------------------------------------------------------------
app.add_command(simulate.command)
app.add_command(check.command)
app.add_command(decode.command)
app.add_command(fig1.command)
app.add_command(sweep.command)
app.add_command(aggregate.command)


def cli(argv: list[str] | None = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        app.main(args=argv, prog_name="byzgrad", standalone_mode=True)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 1
    return 0


if __name__ == "__main__":
    sys.exit(cli())
