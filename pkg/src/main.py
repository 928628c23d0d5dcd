# src/main.py

import typer

from src.common.config import settings
from src.router.routers import include_routers

app = typer.Typer(
    name="tcvbm",
    help="Time-correlated bridge matching for sequences: data, verification, training, sampling and sweeps.",
    no_args_is_help=True,
    add_completion=False,
    pretty_exceptions_enable=settings.DEBUG,
)

# Include commands from the controllers
include_routers(app)


if __name__ == "__main__":
    app()
