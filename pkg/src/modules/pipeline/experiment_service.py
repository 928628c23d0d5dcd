# src/modules/pipeline/experiment_service.py
"""Wiring from a RunConfig to priors, tasks, data, training runs and evaluations."""

from typing import Optional, Tuple

import numpy as np

from src.common.config import RunConfig
from src.common.errors import ConfigError
from src.common.utils.logger import get_logger
from src.modules.nn.nn_service import ema_model, init_adamw, init_ema, init_mlp
from src.modules.prior.prior_service import build_prior
from src.modules.prior.schemas import CorrelationSchedule, PriorSpec

from .coupling_service import baseline_prediction, couple
from .dataset_service import generate
from .metrics_service import evaluate
from .sampling_service import MlpPredictor, Predictor, sample
from .schemas import (
    DatasetParams, Evaluation, Initialization, SyntheticDataset, TaskConfig, TaskKind, TrainResult,
)
from .training_service import train

logger = get_logger(__name__)

# Independent generator streams per stage, keyed off the run seed
TRAIN_STREAM = 0
SAMPLE_STREAM = 2


def task_from_config(cfg: RunConfig) -> TaskConfig:
    try:
        kind = TaskKind(cfg.task)
        initialization = Initialization(cfg.initialization) if cfg.initialization else None
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return TaskConfig(
        kind=kind, n_frames=cfg.n_frames, feature_dim=cfg.feature_dim,
        initialization=initialization, downsample=cfg.downsample, noise_scale=cfg.noise_scale,
    )


def prior_from_config(cfg: RunConfig, eps: Optional[float] = None, alpha: Optional[float] = None) -> PriorSpec:
    """Prior over the free block with a zero boundary term; tasks fill b in per batch."""
    schedule = CorrelationSchedule.parse(cfg.schedule, cfg.quadrature_nodes)
    return build_prior(
        cfg.n_frames,
        cfg.alpha if alpha is None else alpha,
        cfg.eps if eps is None else eps,
        features=cfg.feature_dim,
        horizon=cfg.horizon,
        schedule=schedule,
    )


def dataset_params(cfg: RunConfig, task: TaskConfig) -> DatasetParams:
    return DatasetParams(
        count=cfg.count, frames=task.stored_frames, features=cfg.feature_dim,
        dot_width=cfg.dot_width, speed_min=cfg.speed_min, speed_max=cfg.speed_max,
        val_count=cfg.val_count, seed=cfg.seed,
    )


def dataset_from_config(cfg: RunConfig) -> SyntheticDataset:
    return generate(dataset_params(cfg, task_from_config(cfg)))


def fit(cfg: RunConfig, spec: PriorSpec, task: TaskConfig, data: np.ndarray) -> TrainResult:
    """Fresh model, optimizer and EMA trained for cfg.steps steps."""
    model = init_mlp(task.stored_frames, task.feature_dim, cfg.hidden, cfg.time_embedding, seed=cfg.seed)
    opt = init_adamw(model, lr=cfg.lr, betas=cfg.betas, weight_decay=cfg.weight_decay)
    ema = init_ema(model, cfg.ema)
    rng = np.random.default_rng([cfg.seed, TRAIN_STREAM])
    return train(spec, task, data, model, opt, ema, cfg.steps, cfg.batch, rng)


def generate_from(
    cfg: RunConfig,
    spec: PriorSpec,
    task: TaskConfig,
    predictor: Predictor,
    reference: np.ndarray,
) -> np.ndarray:
    """Couple the reference sequences and run inference from the result."""
    rng = np.random.default_rng([cfg.seed, SAMPLE_STREAM])
    x_T = couple(task, reference, rng)
    return sample(spec, task, predictor, x_T, cfg.n_sample_steps, rng)


def evaluation_set(cfg: RunConfig, dataset: SyntheticDataset) -> np.ndarray:
    return dataset.validation[: cfg.eval_count]


def evaluate_run(
    cfg: RunConfig,
    spec: PriorSpec,
    task: TaskConfig,
    result: TrainResult,
    dataset: SyntheticDataset,
) -> Tuple[Evaluation, Evaluation]:
    """(model, copy baseline) metrics on the evaluation set, model read from EMA weights."""
    reference = evaluation_set(cfg, dataset)
    predictor = MlpPredictor(ema_model(result.model, result.ema))
    generated = generate_from(cfg, spec, task, predictor, reference)
    baseline = baseline_prediction(task, reference)
    return evaluate(task, reference, generated), evaluate(task, reference, baseline)
