# commands/common.py: shared error mapping and output helpers

import contextlib
import json
from typing import Any

import click

from errors import ByzGradError, ConfigError
from logger import get_logger

log = get_logger("BYZGRAD.CLI")

EXIT_CONFIG = 2
EXIT_RUNTIME = 1


class ConfigProblem(click.ClickException):
    exit_code = EXIT_CONFIG

    def __init__(self, error: ConfigError):
        where = error.key_path or "config"
        super().__init__(f"config error at {where}: {error.message}")
        self.key_path = error.key_path


class RunProblem(click.ClickException):
    exit_code = EXIT_RUNTIME


@contextlib.contextmanager
def cli_errors(command: str):
    """Map simulator errors onto the exit-code contract: 2 for config, 1 for the rest."""
    try:
        yield
    except ConfigError as exc:
        log.error("command_config_error", command=command, key_path=exc.key_path, reason=exc.message)
        raise ConfigProblem(exc) from None
    except (ByzGradError, OSError, ValueError) as exc:
        log.error("command_failed", command=command, error=type(exc).__name__, reason=str(exc))
        raise RunProblem(f"{type(exc).__name__}: {exc}") from None


def emit_json(payload: Any) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable))


def _jsonable(value: Any):
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")