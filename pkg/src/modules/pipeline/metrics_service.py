# src/modules/pipeline/metrics_service.py
"""PSNR and 1-D SSIM for sequences in [-1, 1]."""

from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.common.errors import ContractError, WindowError
from src.common.utils.constant import (
    DATA_RANGE, PSNR_CAP, SSIM_K1, SSIM_K2, SSIM_SIGMA, SSIM_WINDOW,
)
from src.common.utils.global_functions import as_float64
from src.common.utils.global_messages import GlobalMessages

from .schemas import Evaluation, TaskConfig


def _check_pair(a: np.ndarray, b: np.ndarray):
    a, b = as_float64(a), as_float64(b)
    if a.shape != b.shape:
        raise ContractError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def psnr(a: np.ndarray, b: np.ndarray, data_range: float = DATA_RANGE) -> float:
    """10 log10(range^2 / MSE), capped at 100 dB for identical inputs."""
    a, b = _check_pair(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_CAP
    return min(PSNR_CAP, 10.0 * np.log10(data_range ** 2 / mse))


@lru_cache(maxsize=4)
def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    window = np.exp(-(offsets ** 2) / (2.0 * sigma ** 2))
    return window / window.sum()


def ssim(a: np.ndarray, b: np.ndarray, data_range: float = DATA_RANGE) -> float:
    """
    Mean structural similarity of two [..., frames, D] arrays.

    Each frame is a 1-D signal; local statistics use a Gaussian window over
    every fully contained position, then the map is averaged per frame and
    the frames are averaged.
    """
    a, b = _check_pair(a, b)
    if a.shape[-1] < SSIM_WINDOW:
        raise WindowError(f"{GlobalMessages.WINDOW_TOO_LARGE} (D={a.shape[-1]}, window={SSIM_WINDOW})")
    window = gaussian_window()
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2

    patches_a = sliding_window_view(a, SSIM_WINDOW, axis=-1)
    patches_b = sliding_window_view(b, SSIM_WINDOW, axis=-1)
    mu_a = patches_a @ window
    mu_b = patches_b @ window
    var_a = (patches_a ** 2) @ window - mu_a ** 2
    var_b = (patches_b ** 2) @ window - mu_b ** 2
    cov = (patches_a * patches_b) @ window - mu_a * mu_b

    numerator = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    denominator = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    per_frame = np.mean(numerator / denominator, axis=-1)
    return float(np.mean(per_frame))


def evaluate(task: TaskConfig, reference: np.ndarray, prediction: np.ndarray) -> Evaluation:
    """Mean per-sequence PSNR and SSIM over the free frames of [B, S, D] batches."""
    reference, prediction = _check_pair(reference, prediction)
    if reference.ndim == 2:
        reference, prediction = reference[None], prediction[None]
    free = task.free
    scores = [
        (psnr(ref[free], pred[free]), ssim(ref[free], pred[free]))
        for ref, pred in zip(reference, prediction)
    ]
    values = np.array(scores)
    return Evaluation(psnr=float(values[:, 0].mean()), ssim=float(values[:, 1].mean()))
