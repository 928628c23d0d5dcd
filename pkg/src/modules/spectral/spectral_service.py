# src/modules/spectral/spectral_service.py
"""Coupling operator construction and the scalar kernels of every matrix function.

All covariance algebra of the prior is diagonal in the eigenbasis of A, so each
matrix function reduces to one of the per-mode kernels below. Kernels broadcast
over numpy arrays of eigenvalues and times.
"""

import numpy as np

from src.common.errors import ArgumentOrderError, InvalidDimensionError, RangeError
from src.common.utils.constant import SERIES_SWITCH
from src.common.utils.global_functions import as_float64
from src.common.utils.global_messages import GlobalMessages

from .schemas import SpectralOperator


def build_operator(n: int, alpha: float) -> SpectralOperator:
    """
    Closed-form eigensystem of alpha * tridiag(1, -2, 1).

    Args:
        n: Sequence length N.
        alpha: Coupling scale; alpha = 0 gives the Brownian configuration.

    Returns:
        SpectralOperator with eigenvalues in strictly decreasing order.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidDimensionError()
    if alpha < 0:
        raise InvalidDimensionError(GlobalMessages.NEGATIVE_ALPHA)
    n = int(n)
    k = np.arange(1, n + 1, dtype=np.float64)
    angle = k * np.pi / (n + 1)
    if alpha == 0:
        eigenvalues = np.zeros(n)
    else:
        eigenvalues = -4.0 * alpha * np.sin(angle / 2.0) ** 2
    m = np.arange(1, n + 1, dtype=np.float64)
    basis = np.sqrt(2.0 / (n + 1)) * np.sin(np.outer(m, k) * np.pi / (n + 1))
    return SpectralOperator(n=n, alpha=float(alpha), eigenvalues=eigenvalues, basis=basis)


def _phi(x: np.ndarray) -> np.ndarray:
    """(e^x - 1)/x with its series near zero."""
    small = np.abs(x) < SERIES_SWITCH
    safe = np.where(small, 1.0, x)
    series = 1.0 + x / 2.0 + x * x / 6.0
    return np.where(small, series, np.expm1(safe) / safe)


def _check_time(t: np.ndarray) -> None:
    if np.any(t < 0):
        raise RangeError(GlobalMessages.NEGATIVE_TIME)


def kernel_mean(lam, t) -> np.ndarray:
    """Mean propagator e^{lambda t}."""
    lam, t = as_float64(lam), as_float64(t)
    return np.exp(lam * t)


def kernel_bresponse(lam, t) -> np.ndarray:
    """Boundary response (e^{lambda t} - 1)/lambda, equal to t at lambda = 0."""
    lam, t = as_float64(lam), as_float64(t)
    _check_time(t)
    return time_change_response(lam, t)


def time_change_response(lam, big_f) -> np.ndarray:
    """Boundary response at a time change F(t), which may be negative."""
    lam, big_f = as_float64(lam), as_float64(big_f)
    return big_f * _phi(lam * big_f)


def kernel_var(lam, t, eps: float) -> np.ndarray:
    """Marginal variance eps (e^{2 lambda t} - 1)/(2 lambda), equal to eps t at lambda = 0."""
    lam, t = as_float64(lam), as_float64(t)
    _check_time(t)
    return eps * t * _phi(2.0 * lam * t)


def kernel_cross(lam, t, t_prime, eps: float) -> np.ndarray:
    """Cross-covariance e^{lambda (t' - t)} s(lambda, t) for t <= t'."""
    t, t_prime = as_float64(t), as_float64(t_prime)
    if np.any(t > t_prime):
        raise ArgumentOrderError()
    return kernel_mean(lam, t_prime - t) * kernel_var(lam, t, eps)
