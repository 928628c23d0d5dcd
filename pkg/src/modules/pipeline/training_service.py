# src/modules/pipeline/training_service.py
"""Bridge-matching training loop."""

from typing import Optional, Tuple

import numpy as np

from src.common.config import settings
from src.common.errors import ContractError, TrainingDivergedError
from src.common.utils.global_functions import as_float64
from src.common.utils.logger import get_logger
from src.modules.bridge.bridge_service import posterior, sample_bridge
from src.modules.nn.nn_service import adamw_step, backward, ema_update
from src.modules.nn.schemas import AdamWState, EmaState, Mlp
from src.modules.prior.schemas import PriorSpec

from .coupling_service import boundary_term, couple
from .sampling_service import Predictor
from .schemas import TaskConfig, TrainResult

logger = get_logger(__name__)


def build_training_batch(
    spec: PriorSpec,
    task: TaskConfig,
    x0: np.ndarray,
    t: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Draw X_t from the bridge between clean x0 and its coupling X_T.

    Args:
        spec: Prior over the free block.
        task: Task layout.
        x0: Clean stored sequences, [B, S, D].
        t: One time per sequence.
        rng: Shared generator; the coupling draws come before the bridge draws.

    Returns:
        Stored sequences at time t; conditioning frames equal those of x0.
    """
    x0 = as_float64(x0)
    free = task.free
    x_T = couple(task, x0, rng)
    spec = spec.with_boundary(boundary_term(task, x0, spec.op.alpha))
    stats = posterior(spec, x0[..., free, :], x_T[..., free, :], t, spec.horizon)
    x_t = x0.copy()
    x_t[..., free, :] = sample_bridge(stats, rng)
    return x_t


def predictor_loss(predictor: Predictor, task: TaskConfig, x_t: np.ndarray, t, x0: np.ndarray) -> float:
    """Regression loss of any predictor, averaged over free entries."""
    free = task.free
    residual = np.asarray(predictor(x_t, t))[..., free, :] - as_float64(x0)[..., free, :]
    return float(np.mean(residual ** 2))


def train(
    spec: PriorSpec,
    task: TaskConfig,
    data: np.ndarray,
    model: Mlp,
    opt: AdamWState,
    ema: EmaState,
    steps: int,
    batch: int,
    rng: np.random.Generator,
    log_every: Optional[int] = None,
) -> TrainResult:
    """
    Fit the clean-data predictor.

    Every step samples sequences with replacement, one uniform time per
    sequence, builds X_t from the bridge and takes an AdamW step on the
    masked squared error; the EMA shadow follows every step.
    """
    data = as_float64(data)
    if steps < 1:
        raise ContractError("steps must be at least 1")
    if data.ndim != 3 or data.shape[1:] != (task.stored_frames, task.feature_dim):
        raise ContractError(f"data shape {data.shape} does not fit the task")
    if model.frames != task.stored_frames or model.features != task.feature_dim:
        raise ContractError("model shape does not fit the task")

    log_every = log_every or settings.LOG_EVERY
    mask = task.free_mask
    losses = []
    for step in range(1, steps + 1):
        idx = rng.integers(0, len(data), size=batch)
        t = rng.uniform(0.0, spec.horizon, size=batch)
        x0 = data[idx]
        x_t = build_training_batch(spec, task, x0, t, rng)
        try:
            loss, grads = backward(model, x_t, t, x0, mask=mask)
            adamw_step(opt, model, grads)
        except TrainingDivergedError as exc:
            logger.error("training diverged at step %d", step)
            raise TrainingDivergedError(f"{exc.detail} (step {step})", trace=losses) from exc
        ema_update(ema, model)
        losses.append(loss)
        if step % log_every == 0 or step == steps:
            logger.info("step %d/%d loss %.6f", step, steps, loss)
    return TrainResult(model=model, opt=opt, ema=ema, losses=losses)
