# src/modules/bridge/bridge_service.py
"""Bridge posterior, bridge sampling and the reparameterized drift."""

import numpy as np

from src.common.errors import ContractError, RangeError, SingularCovarianceError
from src.common.utils.constant import VARIANCE_CLAMP_TOL
from src.common.utils.global_functions import as_float64, check_sequence
from src.common.utils.global_messages import GlobalMessages
from src.common.utils.logger import get_logger
from src.modules.prior.prior_service import cross_covariance, mean_modes, mode_variance, score
from src.modules.prior.schemas import PriorSpec

from .schemas import BridgeStats, GainForm

logger = get_logger(__name__)


def posterior(
    spec: PriorSpec,
    x0: np.ndarray,
    x_tp: np.ndarray,
    t,
    t_prime,
    gain_form: GainForm = GainForm.CROSS,
) -> BridgeStats:
    """
    Law of X_t given X_0 = x0 and X_t' = x_tp.

    Args:
        spec: Prior description.
        x0: Start states, shape [..., N, D].
        x_tp: End states at t_prime, same shape.
        t: Query time(s), 0 <= t <= t_prime.
        t_prime: Conditioning time(s), > 0.
        gain_form: Conditioning gain; GainForm.MARGINAL is not exact for alpha > 0.

    Returns:
        BridgeStats; at t = 0 the mean is x0 and at t = t_prime it is x_tp, both exactly.
    """
    t, t_prime = as_float64(t), as_float64(t_prime)
    if np.any(t_prime == 0):
        raise SingularCovarianceError(GlobalMessages.SINGULAR_CONDITIONING)
    if np.any(t > t_prime):
        raise RangeError(GlobalMessages.TIME_ORDER)
    x0 = check_sequence(x0, spec.n, "x0")
    x_tp = check_sequence(x_tp, spec.n, "x_tp")
    op = spec.op

    s_t = mode_variance(spec, t)
    s_tp = mode_variance(spec, t_prime)
    cross = cross_covariance(spec, t, t_prime)
    gain = (s_t if gain_form == GainForm.MARGINAL else cross) / s_tp
    var = s_t - gain * cross
    if np.any(var < -VARIANCE_CLAMP_TOL):
        raise ContractError(f"{GlobalMessages.NEGATIVE_VARIANCE} (min {var.min():.3e})")
    if np.any(var < 0):
        logger.debug("clamping %d rounding-negative variances", int(np.sum(var < 0)))
    var = np.maximum(var, 0.0)

    x0_modes = op.to_modes(x0)
    mu_t = mean_modes(spec, x0_modes, t)
    mu_tp = mean_modes(spec, x0_modes, t_prime)
    mean = op.from_modes(mu_t + gain[..., None] * (op.to_modes(x_tp) - mu_tp))

    at_start = (t == 0)[..., None, None]
    at_end = (t == t_prime)[..., None, None]
    mean = np.where(at_end, x_tp, np.where(at_start, x0, mean))
    return BridgeStats(op=op, mean=mean, mode_var=var)


def sample_bridge(stats: BridgeStats, rng: np.random.Generator) -> np.ndarray:
    """Draw mean + V diag(sqrt(mode_var)) xi with xi standard normal per column."""
    xi = rng.standard_normal(stats.mean.shape)
    noise = stats.op.from_modes(np.sqrt(stats.mode_var)[..., None] * xi)
    return stats.mean + noise


def drift(spec: PriorSpec, xt: np.ndarray, t, x0_hat: np.ndarray) -> np.ndarray:
    """Optimal drift with the clean state replaced by a prediction."""
    return score(spec, x0_hat, xt, t)
