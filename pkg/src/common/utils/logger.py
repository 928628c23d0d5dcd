import logging

from rich.console import Console
from rich.logging import RichHandler

from src.common.config import settings

_configured = False


def get_logger(name: str) -> logging.Logger:
    """Return a module logger; the rich stderr handler is installed once."""
    global _configured
    if not _configured:
        handler = RichHandler(console=Console(stderr=True), show_path=settings.DEBUG, markup=False)
        root = logging.getLogger("src")
        root.addHandler(handler)
        root.setLevel(settings.LOG_LEVEL.upper())
        root.propagate = False
        _configured = True
    return logging.getLogger(name)
