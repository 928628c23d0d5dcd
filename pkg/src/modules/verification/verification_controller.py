# src/modules/verification/verification_controller.py
"""Verification command."""

from pathlib import Path
from typing import Optional

import typer
from rich.table import Table

from src.common.utils.command import CONTEXT_SETTINGS, build_config, console, exit_on_error

from . import verification_service as service
from .schemas import VerificationReport

router = typer.Typer()


def render_report(report: VerificationReport) -> Table:
    table = Table(title="verification")
    for column in ("check", "result", "error", "tolerance", "detail"):
        table.add_column(column)
    for check in report.checks:
        table.add_row(
            check.name,
            "PASS" if check.passed else "FAIL",
            f"{check.error:.3e}",
            f"{check.tolerance:.1e}",
            check.detail or "",
        )
    return table


@router.command("verify", context_settings=CONTEXT_SETTINGS)
@exit_on_error
def verify(
    ctx: typer.Context,
    config: Optional[Path] = typer.Option(None, "--config", help="key=value config file"),
    corrupt_kernel: bool = typer.Option(False, "--corrupt-kernel", help="Swap in the marginal-ratio bridge gain"),
):
    """Check every closed form against the independent oracle."""
    cfg = build_config(config, ctx.args)
    report = service.run_verification(cfg, corrupt_kernel=corrupt_kernel)
    console.print(render_report(report))
    if not report.passed:
        console.print(f"{len(report.failed)} of {len(report.checks)} checks failed")
        raise typer.Exit(code=1)
    console.print(f"all {len(report.checks)} checks passed")
