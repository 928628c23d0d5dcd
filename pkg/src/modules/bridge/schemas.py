# src/modules/bridge/schemas.py
"""Bridge module Pydantic schemas."""

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.modules.spectral.schemas import SpectralOperator


class GainForm(str, Enum):
    # Sigma_{t,t'} Sigma_{t'}^{-1}; the exact conditioning gain
    CROSS = "cross"
    # Sigma_t Sigma_{t'}^{-1}; agrees with CROSS only at alpha = 0
    MARGINAL = "marginal"


class BridgeStats(BaseModel):
    """Law of X_t given both endpoints, diagonal in the eigenbasis of A."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    op: SpectralOperator
    mean: np.ndarray
    mode_var: np.ndarray

    def covariance(self) -> np.ndarray:
        basis = self.op.basis
        return (basis * self.mode_var[..., None, :]) @ basis.T
