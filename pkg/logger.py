# logger.py: structured logger factory

"""
Structured logging for the simulator.
--------------------------------------
Every component asks for its own named logger:

    log = get_logger("BYZGRAD.Harness")
    log.info("replication_finished", replication=3, err_linf=1.2e-4)

Records are rendered as JSON lines on stderr (stdout is reserved for the
machine-readable CLI output). A file copy is appended when `to_file` is
given or BYZGRAD_LOG_FILE is set.
"""

import os
import sys
from typing import Any, TextIO

import structlog

# ---------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------
LOG_LEVEL = os.getenv("BYZGRAD_LOG_LEVEL", "WARNING").upper()
LOG_FILE = os.getenv("BYZGRAD_LOG_FILE")

_LEVELS = {"DEBUG": 10, "INFO": 20, "WARNING": 30, "ERROR": 40, "CRITICAL": 50}

_PROCESSORS = [
    structlog.processors.add_log_level,
    structlog.processors.TimeStamper(fmt="iso", utc=True),
    structlog.processors.format_exc_info,
    structlog.processors.JSONRenderer(sort_keys=True),
]

_open_files: dict[str, TextIO] = {}


class _TeeLogger:
    """Writes one rendered line to stderr (looked up per call) and every attached file."""

    def __init__(self, files: list[TextIO]):
        self._files = files

    def msg(self, message: str) -> None:
        for stream in [sys.stderr, *self._files]:
            stream.write(message + "\n")
            stream.flush()

    log = debug = info = warning = warn = error = critical = exception = msg


def _file_stream(path: str) -> TextIO:
    if path not in _open_files:
        folder = os.path.dirname(path)
        if folder:
            os.makedirs(folder, exist_ok=True)
        _open_files[path] = open(path, "a", encoding="utf-8")
    return _open_files[path]


def get_logger(name: str, to_file: str | None = None, **initial: Any):
    """
    Return a structlog bound logger for component `name`.

    Args:
        name: dotted component name, bound as the `logger` key
        to_file: optional path receiving a copy of every record
        **initial: extra key/values bound to every record
    """
    target = to_file or LOG_FILE
    files = [_file_stream(target)] if target else []

    level = _LEVELS.get(LOG_LEVEL, 30)
    return structlog.wrap_logger(
        _TeeLogger(files),
        processors=_PROCESSORS,
        wrapper_class=structlog.make_filtering_bound_logger(level),
    ).bind(logger=name, **initial)
