# src/modules/pipeline/sweep_service.py
"""eps x alpha grid runs and CSV metric tables."""

import csv
import io
from pathlib import Path
from typing import List

from src.common.config import RunConfig
from src.common.errors import ConfigError, TcvbmError
from src.common.utils.global_messages import GlobalMessages
from src.common.utils.logger import get_logger

from . import experiment_service as experiment
from .schemas import SweepRow, SyntheticDataset

logger = get_logger(__name__)

CSV_HEADER = ["seed", "task", "eps", "alpha", "psnr", "ssim", "loss"]


def run_cell(cfg: RunConfig, dataset: SyntheticDataset, eps: float, alpha: float) -> SweepRow:
    """Train and evaluate one grid cell; failures become a failed row."""
    task = experiment.task_from_config(cfg)
    try:
        spec = experiment.prior_from_config(cfg, eps=eps, alpha=alpha)
        result = experiment.fit(cfg, spec, task, dataset.train)
        model_eval, _ = experiment.evaluate_run(cfg, spec, task, result, dataset)
    except TcvbmError as exc:
        logger.warning("sweep cell eps=%g alpha=%g failed: %s", eps, alpha, exc.detail)
        return SweepRow(seed=cfg.seed, task=task.kind, eps=eps, alpha=alpha, failed=True)
    except (ValueError, ArithmeticError) as exc:
        # pydantic ValidationError is a ValueError
        logger.warning("sweep cell eps=%g alpha=%g failed: %s", eps, alpha, exc)
        return SweepRow(seed=cfg.seed, task=task.kind, eps=eps, alpha=alpha, failed=True)
    return SweepRow(
        seed=cfg.seed, task=task.kind, eps=eps, alpha=alpha,
        psnr=model_eval.psnr, ssim=model_eval.ssim, loss=result.final_loss,
    )


def run_sweep(cfg: RunConfig, dataset: SyntheticDataset) -> List[SweepRow]:
    if not cfg.sweep_eps or not cfg.sweep_alpha:
        raise ConfigError(GlobalMessages.EMPTY_GRID)
    rows = []
    for eps in cfg.sweep_eps:
        for alpha in cfg.sweep_alpha:
            logger.info("sweep cell eps=%g alpha=%g", eps, alpha)
            rows.append(run_cell(cfg, dataset, eps, alpha))
    return rows


def _cell(value) -> str:
    return "" if value is None else repr(float(value))


def format_rows(rows: List[SweepRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        if row.failed:
            metrics = ["failed"] * 3
        else:
            metrics = [_cell(row.psnr), _cell(row.ssim), _cell(row.loss)]
        writer.writerow([row.seed, row.task.value, repr(row.eps), repr(row.alpha), *metrics])
    return buffer.getvalue()


def write_rows(path: Path, rows: List[SweepRow]) -> Path:
    path = Path(path)
    path.write_text(format_rows(rows))
    logger.info("wrote %d rows to %s", len(rows), path)
    return path
