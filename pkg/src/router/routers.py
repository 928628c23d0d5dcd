# src/router/routers.py

import typer

from src.modules.pipeline.pipeline_controller import router as pipeline_router
from src.modules.verification.verification_controller import router as verification_router


def include_routers(app: typer.Typer) -> None:
    """Register every controller's commands on the application."""
    app.registered_commands.extend(verification_router.registered_commands)
    app.registered_commands.extend(pipeline_router.registered_commands)
