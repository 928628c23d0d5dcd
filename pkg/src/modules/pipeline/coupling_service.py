# src/modules/pipeline/coupling_service.py
"""Task couplings X0 -> X_T, boundary terms and copy baselines."""

import numpy as np

from src.common.utils.global_functions import as_float64

from .schemas import Initialization, TaskConfig, TaskKind


def degrade(frames: np.ndarray, factor: int) -> np.ndarray:
    """Block-mean downsample along features, then nearest upsample back."""
    shape = frames.shape
    low = frames.reshape(*shape[:-1], shape[-1] // factor, factor).mean(axis=-1)
    return np.repeat(low, factor, axis=-1)


def linear_fill(x_stored: np.ndarray, n_frames: int) -> np.ndarray:
    """Interior frames on the straight line between the two endpoints."""
    n = np.arange(1, n_frames + 1, dtype=np.float64)[:, None]
    first = x_stored[..., :1, :]
    last = x_stored[..., -1:, :]
    return ((n_frames + 1 - n) * first + n * last) / (n_frames + 1)


def couple(task: TaskConfig, x0: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """
    Corrupt clean stored sequences into starting points X_T.

    Conditioning frames pass through unchanged; only the free block is
    replaced according to the task's initialization.
    """
    x0 = as_float64(x0)
    x_T = x0.copy()
    free = task.free
    block_shape = x0[..., free, :].shape
    init = task.initialization

    if init == Initialization.GAUSSIAN_NOISE:
        x_T[..., free, :] = rng.standard_normal(block_shape)
    elif init == Initialization.LINEAR_INTERP:
        x_T[..., free, :] = linear_fill(x0, task.n_frames)
    elif init == Initialization.STATIC_COPY:
        x_T[..., free, :] = np.broadcast_to(x0[..., :1, :], block_shape)
    elif init == Initialization.LOWRES_UPSAMPLE:
        x_T[..., free, :] = degrade(x0[..., free, :], task.downsample)
    elif init == Initialization.LOWRES_CONCAT_NOISE:
        noise = rng.standard_normal(block_shape)
        x_T[..., free, :] = degrade(x0[..., free, :], task.downsample) + task.noise_scale * noise
    return x_T


def boundary_term(task: TaskConfig, x_stored: np.ndarray, alpha: float) -> np.ndarray:
    """Effective drift offset alpha * b over the free block, read off the conditioning frames."""
    x_stored = as_float64(x_stored)
    b = np.zeros_like(x_stored[..., task.free, :])
    if task.kind == TaskKind.INTERPOLATION:
        b[..., 0, :] += x_stored[..., 0, :]
        b[..., -1, :] += x_stored[..., -1, :]
    elif task.kind == TaskKind.IMAGE_TO_VIDEO:
        b[..., 0, :] = x_stored[..., 0, :]
    return alpha * b


def baseline_prediction(task: TaskConfig, x0: np.ndarray) -> np.ndarray:
    """Copy baseline: nearest endpoint, static first frame or upsampled low resolution."""
    x0 = as_float64(x0)
    guess = x0.copy()
    free = task.free
    if task.kind == TaskKind.INTERPOLATION:
        n = np.arange(1, task.n_frames + 1)
        near_left = (n <= (task.n_frames + 1) / 2.0)[:, None]
        guess[..., free, :] = np.where(near_left, x0[..., :1, :], x0[..., -1:, :])
    elif task.kind == TaskKind.IMAGE_TO_VIDEO:
        guess[..., free, :] = np.broadcast_to(x0[..., :1, :], guess[..., free, :].shape)
    else:
        guess[..., free, :] = degrade(x0[..., free, :], task.downsample)
    return guess
