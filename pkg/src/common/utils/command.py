# src/common/utils/command.py
"""Shared plumbing for command controllers."""

from functools import wraps
from pathlib import Path
from typing import List, Optional

import typer
from rich.console import Console

from src.common.config import RunConfig, load_run_config, parse_cli_overrides
from src.common.errors import TcvbmError
from src.common.utils.logger import get_logger

logger = get_logger(__name__)

# Reports go to stdout; logs go to stderr
console = Console(highlight=False)

# Lets every command accept `--<config key> <value>` pairs
CONTEXT_SETTINGS = {"allow_extra_args": True, "ignore_unknown_options": True}

IO_EXIT_CODE = 3


def build_config(config: Optional[Path], extra: List[str]) -> RunConfig:
    return load_run_config(config, parse_cli_overrides(extra))


def exit_on_error(func):
    """Map domain and I/O errors to the command exit-code contract."""

    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except TcvbmError as exc:
            logger.error("%s: %s", type(exc).__name__, exc.detail)
            raise typer.Exit(code=exc.exit_code) from exc
        except OSError as exc:
            logger.error("I/O error: %s", exc)
            raise typer.Exit(code=IO_EXIT_CODE) from exc

    return wrapper
