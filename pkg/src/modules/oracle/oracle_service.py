# src/modules/oracle/oracle_service.py
"""
Independent verification machinery.

Nothing here calls the spectral kernels or the prior/bridge closed forms: the
coupling matrix is rebuilt from its stencil, matrix functions go through a
Jacobi eigensolver, and time integrals are done by quadrature.
"""

from functools import lru_cache
from typing import Iterable, Tuple

import numpy as np

from src.common.errors import ContractError, SimulationDivergedError, SingularMatrixError
from src.common.utils.constant import JACOBI_MAX_SWEEPS, JACOBI_TOL, MAX_CONDITION, RIDGE
from src.common.utils.global_functions import as_float64
from src.common.utils.global_messages import GlobalMessages
from src.common.utils.logger import get_logger
from src.modules.prior.schemas import CorrelationSchedule, PriorSpec

from .schemas import DenseGaussian, Ensemble, MonteCarloMoments, SimConfig

logger = get_logger(__name__)

# Composite Simpson resolution for the time integrals
RATE_INTERVALS = 200
VARIANCE_INTERVALS = 2000


def tridiagonal_matrix(n: int, alpha: float) -> np.ndarray:
    """alpha * tridiag(1, -2, 1) built from the stencil."""
    matrix = -2.0 * np.eye(n) + np.eye(n, k=1) + np.eye(n, k=-1)
    return alpha * matrix


# ============================================================================
# EIGENSOLVER
# ============================================================================

def dense_eigensolve(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cyclic Jacobi eigensolver for a dense symmetric matrix.

    Args:
        matrix: Symmetric matrix (within 1e-10).

    Returns:
        (eigenvalues sorted descending, eigenvectors as matching columns)
    """
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractError(GlobalMessages.NOT_SYMMETRIC)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-10 * scale:
        raise ContractError(GlobalMessages.NOT_SYMMETRIC)
    a = (a + a.T) / 2.0
    n = a.shape[0]
    v = np.eye(n)

    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.sqrt(np.sum(a * a) - np.sum(np.diag(a) ** 2))
        if off <= JACOBI_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                tan = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau)) if tau != 0 else 1.0
                cos = 1.0 / np.sqrt(1.0 + tan * tan)
                sin = tan * cos

                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = cos * col_p - sin * col_q
                a[:, q] = sin * col_p + cos * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = cos * row_p - sin * row_q
                a[q, :] = sin * row_p + cos * row_q

                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = cos * vec_p - sin * vec_q
                v[:, q] = sin * vec_p + cos * vec_q

    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    return values[order], v[:, order]


@lru_cache(maxsize=32)
def _eigensystem(n: int, alpha: float) -> Tuple[np.ndarray, np.ndarray]:
    return dense_eigensolve(tridiagonal_matrix(n, alpha))


def _apply(vecs: np.ndarray, diag: np.ndarray) -> np.ndarray:
    return (vecs * diag) @ vecs.T


# ============================================================================
# DENSE PRIOR STATISTICS
# ============================================================================

def _simpson(values: np.ndarray, width) -> np.ndarray:
    """Composite Simpson over the last axis (odd number of equally spaced nodes)."""
    weights = np.ones(values.shape[-1])
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return values @ weights * (as_float64(width) / 3.0)


def _integrated_rate(schedule: CorrelationSchedule, u: np.ndarray) -> np.ndarray:
    """int_0^u f by quadrature (never the closed-form antiderivative)."""
    u = as_float64(u)
    if schedule.is_constant:
        return u
    grid = u[..., None] * np.linspace(0.0, 1.0, RATE_INTERVALS + 1)
    return _simpson(schedule.rate(grid), u / RATE_INTERVALS)


def _response(lam: np.ndarray, tau: float) -> np.ndarray:
    """int_0^tau e^{lam u} du."""
    out = np.full_like(lam, float(tau))
    nonzero = lam != 0
    out[nonzero] = np.expm1(lam[nonzero] * tau) / lam[nonzero]
    return out


def _variance_diag(spec: PriorSpec, lam: np.ndarray, t: float) -> np.ndarray:
    """Eigenvalues of Sigma_t = eps int_0^t exp(2 A (F(t) - F(s))) ds."""
    if t == 0:
        return np.zeros_like(lam)
    if spec.schedule.is_constant:
        return spec.eps * _response(2.0 * lam, t)
    s = np.linspace(0.0, t, VARIANCE_INTERVALS + 1)
    gap = _integrated_rate(spec.schedule, t) - _integrated_rate(spec.schedule, s)
    integrand = np.exp(2.0 * lam[:, None] * gap[None, :])
    return spec.eps * _simpson(integrand, t / VARIANCE_INTERVALS)


def dense_marginal(spec: PriorSpec, x0: np.ndarray, t: float) -> DenseGaussian:
    """Law of X_t given X_0 with an explicit N x N covariance."""
    lam, vecs = _eigensystem(spec.n, spec.op.alpha)
    big_f = float(_integrated_rate(spec.schedule, t))
    mean = _apply(vecs, np.exp(lam * big_f)) @ as_float64(x0) + _apply(vecs, _response(lam, big_f)) @ spec.b
    return DenseGaussian(mean=mean, cov=_apply(vecs, _variance_diag(spec, lam, t)))


def joint_gaussian(spec: PriorSpec, x0: np.ndarray, t: float, t_prime: float) -> DenseGaussian:
    """
    Joint law of (X_t, X_t') given X_0, assembled block by block.

    Returns:
        DenseGaussian over the 2N stacked rows [X_t; X_t'].
    """
    if t > t_prime:
        raise ContractError(GlobalMessages.TIME_ORDER)
    lam, vecs = _eigensystem(spec.n, spec.op.alpha)
    first = dense_marginal(spec, x0, t)
    second = dense_marginal(spec, x0, t_prime)
    gap = float(_integrated_rate(spec.schedule, t_prime) - _integrated_rate(spec.schedule, t))
    cross = _apply(vecs, np.exp(lam * gap)) @ first.cov
    cov = np.block([[first.cov, cross.T], [cross, second.cov]])
    cov = (cov + cov.T) / 2.0
    return DenseGaussian(mean=np.concatenate([first.mean, second.mean], axis=0), cov=cov)


# ============================================================================
# GAUSSIAN CONDITIONING
# ============================================================================

def condition(g: DenseGaussian, observed, value: np.ndarray, ridge: bool = True) -> DenseGaussian:
    """
    Condition a dense Gaussian on some of its rows.

    Args:
        g: Joint Gaussian.
        observed: Index array or slice of the observed rows.
        value: Observed values (rows matching `observed`).
        ridge: Add a small ridge when the observed block is ill-conditioned.

    Returns:
        Gaussian of the unobserved rows; a point mass at `value` when every
        row is observed.
    """
    size = g.cov.shape[0]
    obs = np.arange(size)[observed]
    free = np.setdiff1d(np.arange(size), obs)
    value = as_float64(value)
    if free.size == 0:
        return DenseGaussian(mean=value.copy(), cov=np.zeros((size, size)))

    s_yy = g.cov[np.ix_(obs, obs)]
    s_xy = g.cov[np.ix_(free, obs)]
    s_xx = g.cov[np.ix_(free, free)]
    if np.linalg.cond(s_yy) > MAX_CONDITION:
        if not ridge:
            raise SingularMatrixError()
        logger.debug("ridge rescue on a %d x %d observed block", obs.size, obs.size)
        s_yy = s_yy + RIDGE * np.eye(obs.size)
    try:
        gain = np.linalg.solve(s_yy, s_xy.T).T
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError() from exc
    mean = g.mean[free] + gain @ (value - g.mean[obs])
    cov = s_xx - gain @ s_xy.T
    return DenseGaussian(mean=mean, cov=(cov + cov.T) / 2.0)


def dense_log_density(g: DenseGaussian, x: np.ndarray) -> float:
    """Log-density summed over feature columns that share `g.cov`."""
    residual = as_float64(x) - g.mean
    if residual.ndim == 1:
        residual = residual[:, None]
    sign, logdet = np.linalg.slogdet(2.0 * np.pi * g.cov)
    if sign <= 0:
        raise SingularMatrixError()
    quad = np.sum(residual * np.linalg.solve(g.cov, residual))
    return float(-0.5 * quad - 0.5 * residual.shape[1] * logdet)


# ============================================================================
# EULER-MARUYAMA
# ============================================================================

def standard_normal(gen: np.random.Generator, shape) -> np.ndarray:
    """Box-Muller normals from the generator's uniforms."""
    u1 = gen.random(shape)
    u2 = gen.random(shape)
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * np.pi * u2)


def counter_generator(seed: int) -> np.random.Generator:
    """Counter-based (Philox) stream keyed by the seed."""
    return np.random.Generator(np.random.Philox(key=seed))


def simulate_prior(
    spec: PriorSpec,
    x0: np.ndarray,
    t_end: float,
    cfg: SimConfig,
    checkpoints: Iterable[float] = (),
) -> Ensemble:
    """
    Euler-Maruyama paths of dX = f(t)(A X + b) dt + sqrt(eps) dW.

    Args:
        spec: Prior description (b must be a single [N, D] array).
        x0: Common initial state, shape [N, D].
        t_end: Final time, at most the horizon.
        cfg: Step size, path count and seed.
        checkpoints: Times at which to keep every path's state.

    Returns:
        Ensemble with endpoint states [paths, N, D] and checkpoint states.
    """
    if t_end > spec.horizon or t_end < 0:
        raise ContractError(GlobalMessages.TIME_OUT_OF_RANGE)
    matrix = tridiagonal_matrix(spec.n, spec.op.alpha)
    x0 = as_float64(x0)
    steps = max(1, int(round(t_end / cfg.dt)))
    h = t_end / steps
    keep = {int(round(c / h)): float(c) for c in checkpoints}
    gen = counter_generator(cfg.seed)

    state = np.broadcast_to(x0, (cfg.paths,) + x0.shape).copy()
    saved = {}
    if 0 in keep:
        saved[keep[0]] = state.copy()
    noise_scale = np.sqrt(spec.eps * h)
    for k in range(steps):
        rate = float(spec.schedule.rate(k * h))
        state += rate * (np.matmul(matrix, state) + spec.b) * h
        state += noise_scale * standard_normal(gen, state.shape)
        if (k + 1) % 100 == 0 or k + 1 == steps:
            if not np.all(np.isfinite(state)):
                raise SimulationDivergedError(f"{GlobalMessages.SIMULATION_DIVERGED} (step {k + 1})")
        if k + 1 in keep:
            saved[keep[k + 1]] = state.copy()
    return Ensemble(endpoint=state, checkpoints=saved)


def ensemble_moments(samples: np.ndarray) -> MonteCarloMoments:
    """Sample moments of [paths, N, D] states with standard errors."""
    paths = samples.shape[0]
    mean = samples.mean(axis=0)
    centered = samples - mean
    mean_se = centered.std(axis=0, ddof=1) / np.sqrt(paths)
    by_column = np.moveaxis(centered, -1, 0)  # [D, paths, N]
    products = by_column[..., :, None] * by_column[..., None, :]
    cov = products.mean(axis=1) * paths / (paths - 1)
    cov_se = products.std(axis=1, ddof=1) / np.sqrt(paths)
    return MonteCarloMoments(mean=mean, mean_se=mean_se, cov=cov, cov_se=cov_se)
