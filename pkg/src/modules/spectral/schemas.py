# src/modules/spectral/schemas.py
"""Spectral module Pydantic schemas."""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class SpectralOperator(BaseModel):
    """Eigensystem of the scaled tridiagonal coupling matrix alpha * A.

    `basis` holds the eigenvectors as columns; the matrix is symmetric so the
    basis is orthonormal and its own inverse transposed.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int = Field(gt=0)
    alpha: float = Field(ge=0)
    eigenvalues: np.ndarray
    basis: np.ndarray

    def to_modes(self, x: np.ndarray) -> np.ndarray:
        """Eigenbasis coordinates V^T x of an [..., n, D] array."""
        return np.matmul(self.basis.T, x)

    def from_modes(self, x_modes: np.ndarray) -> np.ndarray:
        """Inverse of `to_modes`: V x."""
        return np.matmul(self.basis, x_modes)

    def matrix(self) -> np.ndarray:
        """Dense alpha * A rebuilt from the eigensystem."""
        return (self.basis * self.eigenvalues) @ self.basis.T
