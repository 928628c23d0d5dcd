# src/modules/prior/prior_service.py
"""Exact statistics of the time-correlated prior process.

Times may be scalars or arrays shaped like the leading batch axes of the
sequences they go with; per-mode outputs then carry those axes in front of N.
"""

from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from src.common.errors import RangeError, SingularCovarianceError
from src.common.utils.constant import SINGULAR_VARIANCE
from src.common.utils.global_functions import as_float64, check_sequence, time_array
from src.common.utils.global_messages import GlobalMessages
from src.modules.spectral.spectral_service import (
    build_operator, kernel_mean, kernel_var, time_change_response,
)

from .schemas import CorrelationSchedule, GaussianStats, PriorSpec, ScheduleKind


def build_prior(
    n: int,
    alpha: float,
    eps: float,
    b: Optional[np.ndarray] = None,
    features: int = 1,
    horizon: float = 1.0,
    schedule: Optional[CorrelationSchedule] = None,
) -> PriorSpec:
    """Assemble a PriorSpec; b defaults to zeros of shape [n, features]."""
    op = build_operator(n, alpha)
    b = np.zeros((n, features)) if b is None else as_float64(b)
    return PriorSpec(op=op, eps=eps, b=b, horizon=horizon, schedule=schedule or CorrelationSchedule())


def antiderivative(schedule: CorrelationSchedule, t) -> np.ndarray:
    """F(t) = int_0^t f, in closed form for every schedule kind."""
    t = as_float64(t)
    if np.any(t < 0):
        raise RangeError(GlobalMessages.NEGATIVE_TIME)
    if schedule.kind == ScheduleKind.LINEAR:
        return schedule.a * t - schedule.c * t * t / 2.0
    if schedule.kind == ScheduleKind.QUADRATIC:
        return t - t * t + t ** 3 / 3.0
    if schedule.kind == ScheduleKind.EXPONENTIAL:
        return -np.expm1(-schedule.r * t) / schedule.r
    return t


@lru_cache(maxsize=16)
def _legendre(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(nodes)


def _check_horizon(spec: PriorSpec, t: np.ndarray) -> None:
    if np.any(t < 0) or np.any(t > spec.horizon):
        raise RangeError(f"{GlobalMessages.TIME_OUT_OF_RANGE} (T={spec.horizon})")


def mode_variance(spec: PriorSpec, t) -> np.ndarray:
    """Per-mode marginal variance at time t."""
    t = as_float64(t)
    _check_horizon(spec, t)
    lam = spec.op.eigenvalues
    if spec.schedule.is_constant:
        return kernel_var(lam, time_array(t), spec.eps)

    # eps * int_0^t exp(2 lambda (F(t) - F(s))) ds by Gauss-Legendre on [0, t]
    x, w = _legendre(spec.schedule.quadrature_nodes)
    s = t[..., None] * (x + 1.0) / 2.0
    gap = antiderivative(spec.schedule, t)[..., None] - antiderivative(spec.schedule, s)
    integrand = np.exp(2.0 * lam[:, None] * gap[..., None, :])
    return spec.eps * (t[..., None] / 2.0) * (integrand @ w)


def _propagators(spec: PriorSpec, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    big_f = time_array(antiderivative(spec.schedule, t))
    lam = spec.op.eigenvalues
    return kernel_mean(lam, big_f), time_change_response(lam, big_f)


def mean_modes(spec: PriorSpec, x0_modes: np.ndarray, t) -> np.ndarray:
    """Eigenbasis mean m x~0 + h b~ for eigenbasis initial state x~0."""
    t = as_float64(t)
    m, h = _propagators(spec, t)
    return m[..., None] * x0_modes + h[..., None] * spec.op.to_modes(spec.b)


def marginal(spec: PriorSpec, x0: np.ndarray, t) -> GaussianStats:
    """
    Law of X_t given X_0 = x0.

    Args:
        spec: Prior description.
        x0: Initial sequences, shape [..., N, D].
        t: Time in [0, T]; scalar or one per leading batch element.

    Returns:
        GaussianStats with the exact mean and per-mode variances.
    """
    x0 = check_sequence(x0, spec.n, "x0")
    t = as_float64(t)
    _check_horizon(spec, t)
    op = spec.op
    mean = op.from_modes(mean_modes(spec, op.to_modes(x0), t))
    return GaussianStats(op=op, mean=mean, mode_var=mode_variance(spec, t))


def score(spec: PriorSpec, x0: np.ndarray, xt: np.ndarray, t) -> np.ndarray:
    """Gradient of log q(x_t | x_0): -Sigma^{-1}(x_t - mu), column-wise."""
    t = as_float64(t)
    if np.any(t == 0):
        raise SingularCovarianceError()
    xt = check_sequence(xt, spec.n, "xt")
    stats = marginal(spec, x0, t)
    if np.any(stats.mode_var < SINGULAR_VARIANCE):
        raise SingularCovarianceError()
    op = spec.op
    residual = op.to_modes(xt - stats.mean)
    return -op.from_modes(residual / stats.mode_var[..., None])


def cross_covariance(spec: PriorSpec, t, t_prime) -> np.ndarray:
    """Per-mode Cov(X_t, X_t' | X_0) = e^{lambda (F(t') - F(t))} s(t) for t <= t'."""
    t, t_prime = as_float64(t), as_float64(t_prime)
    if np.any(t > t_prime):
        raise RangeError(GlobalMessages.TIME_ORDER)
    _check_horizon(spec, t_prime)
    gap = antiderivative(spec.schedule, t_prime) - antiderivative(spec.schedule, t)
    return kernel_mean(spec.op.eigenvalues, time_array(gap)) * mode_variance(spec, t)
