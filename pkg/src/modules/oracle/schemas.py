# src/modules/oracle/schemas.py
"""Oracle module Pydantic schemas."""

from typing import Dict

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


# ============================================================================
# SIMULATION
# ============================================================================

class SimConfig(BaseModel):
    """Euler-Maruyama settings. Acceptance runs use dt <= 1e-2 and paths >= 1e4."""

    dt: float = Field(default=1e-3, gt=0)
    paths: int = Field(default=200000, gt=0)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)

    @property
    def acceptance_grade(self) -> bool:
        return self.dt <= 1e-2 and self.paths >= 10_000


class Ensemble(BaseModel):
    """Simulated states: all endpoints plus the states at requested checkpoints."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    endpoint: np.ndarray
    checkpoints: Dict[float, np.ndarray] = {}


class MonteCarloMoments(BaseModel):
    """Sample mean/covariance of an ensemble with their standard errors.

    `cov` and `cov_se` are per feature column: shape [D, N, N].
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    mean: np.ndarray
    mean_se: np.ndarray
    cov: np.ndarray
    cov_se: np.ndarray


# ============================================================================
# DENSE GAUSSIANS
# ============================================================================

class DenseGaussian(BaseModel):
    """Gaussian with an explicit covariance.

    `mean` rows index the random vector; extra trailing columns are feature
    columns that share `cov`.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    mean: np.ndarray
    cov: np.ndarray

