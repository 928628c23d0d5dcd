# src/modules/pipeline/pipeline_controller.py
"""Data, training, sampling, metrics and sweep commands."""

from pathlib import Path
from typing import List, Optional

import typer
from rich.table import Table

from src.common.config import RunConfig
from src.common.errors import ConfigError, TrainingDivergedError
from src.common.utils.command import CONTEXT_SETTINGS, build_config, console, exit_on_error
from src.common.utils.global_functions import write_sidecar
from src.common.utils.logger import get_logger
from src.modules.nn.checkpoint_service import load_checkpoint, save_checkpoint
from src.modules.nn.nn_service import ema_model

from . import dataset_service, experiment_service, metrics_service, sweep_service
from .coupling_service import baseline_prediction
from .sampling_service import MlpPredictor
from .schemas import SweepRow, SyntheticDataset, TaskConfig

logger = get_logger(__name__)

router = typer.Typer()

CONFIG_OPTION = typer.Option(None, "--config", help="key=value config file")


def _load_data(cfg: RunConfig, task: TaskConfig) -> SyntheticDataset:
    dataset = dataset_service.load_dataset(cfg.require("data"), cfg.val_count, cfg.seed)
    expected = (task.stored_frames, task.feature_dim)
    if dataset.sequences.shape[1:] != expected:
        raise ConfigError(f"dataset frames/features {dataset.sequences.shape[1:]} do not match the task {expected}")
    return dataset


def loss_trace_path(checkpoint: Path) -> Path:
    return Path(str(checkpoint) + ".loss.csv")


def write_loss_trace(path: Path, losses: List[float]) -> Path:
    lines = ["step,loss"] + [f"{step},{loss!r}" for step, loss in enumerate(losses, start=1)]
    path.write_text("\n".join(lines) + "\n")
    return path


def _rows_table(rows: List[SweepRow]) -> Table:
    table = Table()
    for column in sweep_service.CSV_HEADER:
        table.add_column(column)
    for row in rows:
        metrics = ["failed"] * 3 if row.failed else [
            "" if value is None else f"{value:.4f}" for value in (row.psnr, row.ssim, row.loss)
        ]
        table.add_row(str(row.seed), row.task.value, f"{row.eps:g}", f"{row.alpha:g}", *metrics)
    return table


@router.command("gen-data", context_settings=CONTEXT_SETTINGS)
@exit_on_error
def gen_data(ctx: typer.Context, config: Optional[Path] = CONFIG_OPTION):
    """Generate a bouncing-dot dataset file."""
    cfg = build_config(config, ctx.args)
    out = cfg.require("out")
    dataset = experiment_service.dataset_from_config(cfg)
    dataset_service.write_sequences(out, dataset.sequences)
    write_sidecar(out, cfg.as_lines(), "gen-data")
    console.print(f"wrote {len(dataset.sequences)} sequences of shape {dataset.sequences.shape[1:]} to {out}")


@router.command("train", context_settings=CONTEXT_SETTINGS)
@exit_on_error
def train(ctx: typer.Context, config: Optional[Path] = CONFIG_OPTION):
    """Train the clean-data predictor and write a checkpoint."""
    cfg = build_config(config, ctx.args)
    checkpoint = cfg.require("checkpoint")
    task = experiment_service.task_from_config(cfg)
    spec = experiment_service.prior_from_config(cfg)
    dataset = _load_data(cfg, task)
    try:
        result = experiment_service.fit(cfg, spec, task, dataset.train)
    except TrainingDivergedError as exc:
        write_loss_trace(loss_trace_path(checkpoint), exc.trace)
        raise
    save_checkpoint(checkpoint, result.model, result.opt, result.ema)
    write_loss_trace(loss_trace_path(checkpoint), result.losses)
    write_sidecar(checkpoint, cfg.as_lines(), "train")
    console.print(f"trained {cfg.steps} steps, final loss {result.final_loss:.6f}")


@router.command("sample", context_settings=CONTEXT_SETTINGS)
@exit_on_error
def sample(ctx: typer.Context, config: Optional[Path] = CONFIG_OPTION):
    """Generate sequences for the evaluation set from a checkpoint."""
    cfg = build_config(config, ctx.args)
    out = cfg.require("out")
    task = experiment_service.task_from_config(cfg)
    spec = experiment_service.prior_from_config(cfg)
    dataset = _load_data(cfg, task)
    model, _, ema = load_checkpoint(cfg.require("checkpoint"))
    reference = experiment_service.evaluation_set(cfg, dataset)
    predictor = MlpPredictor(ema_model(model, ema))
    generated = experiment_service.generate_from(cfg, spec, task, predictor, reference)

    dataset_service.write_sequences(out, generated)
    write_sidecar(out, cfg.as_lines(), "sample")
    dataset_service.export_strips(generated, Path(str(out) + ".strips"), cfg.strip_scale)
    if cfg.reference is not None:
        dataset_service.write_sequences(cfg.reference, reference)
        write_sidecar(cfg.reference, cfg.as_lines(), "sample")
    console.print(f"sampled {len(generated)} sequences with {cfg.n_sample_steps} steps to {out}")


@router.command("metrics", context_settings=CONTEXT_SETTINGS)
@exit_on_error
def metrics(ctx: typer.Context, config: Optional[Path] = CONFIG_OPTION):
    """PSNR and SSIM of a prediction file against a reference file."""
    cfg = build_config(config, ctx.args)
    task = experiment_service.task_from_config(cfg)
    reference = dataset_service.read_sequences(cfg.require("reference"))
    prediction = dataset_service.read_sequences(cfg.require("prediction"))
    evaluation = metrics_service.evaluate(task, reference, prediction)
    baseline = metrics_service.evaluate(task, reference, baseline_prediction(task, reference))
    row = SweepRow(seed=cfg.seed, task=task.kind, eps=cfg.eps, alpha=cfg.alpha,
                   psnr=evaluation.psnr, ssim=evaluation.ssim)
    console.print(_rows_table([row]))
    console.print(f"copy baseline: psnr {baseline.psnr:.4f}, ssim {baseline.ssim:.4f}")
    if cfg.out is not None:
        sweep_service.write_rows(cfg.out, [row])
        write_sidecar(cfg.out, cfg.as_lines(), "metrics")


@router.command("sweep", context_settings=CONTEXT_SETTINGS)
@exit_on_error
def sweep(ctx: typer.Context, config: Optional[Path] = CONFIG_OPTION):
    """Train and evaluate every (eps, alpha) cell of the grid."""
    cfg = build_config(config, ctx.args)
    out = cfg.require("out")
    task = experiment_service.task_from_config(cfg)
    dataset = _load_data(cfg, task) if cfg.data is not None else experiment_service.dataset_from_config(cfg)
    rows = sweep_service.run_sweep(cfg, dataset)
    sweep_service.write_rows(out, rows)
    write_sidecar(out, cfg.as_lines(), "sweep")
    console.print(_rows_table(rows))
    failed = sum(row.failed for row in rows)
    if failed:
        logger.warning("%d of %d sweep cells failed", failed, len(rows))
