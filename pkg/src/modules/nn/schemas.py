# src/modules/nn/schemas.py
"""Network module Pydantic schemas."""

from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class Mlp(BaseModel):
    """Fully connected predictor over flattened [frames, features] sequences.

    Input width is frames * features + embedding_width, output width is
    frames * features. Parameters are 32-bit unless replayed in 64-bit.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    frames: int = Field(gt=0)
    features: int = Field(gt=0)
    embedding_width: int = Field(ge=0)
    widths: List[int]
    weights: List[np.ndarray]
    biases: List[np.ndarray]

    @property
    def params(self) -> List[np.ndarray]:
        """Parameters in declaration order: W1, b1, W2, b2, ..."""
        out = []
        for weight, bias in zip(self.weights, self.biases):
            out.extend([weight, bias])
        return out

    def astype(self, dtype) -> "Mlp":
        return Mlp(
            frames=self.frames, features=self.features, embedding_width=self.embedding_width,
            widths=list(self.widths),
            weights=[w.astype(dtype) for w in self.weights],
            biases=[b.astype(dtype) for b in self.biases],
        )


class MlpGrads(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    weights: List[np.ndarray]
    biases: List[np.ndarray]

    @property
    def params(self) -> List[np.ndarray]:
        out = []
        for weight, bias in zip(self.weights, self.biases):
            out.extend([weight, bias])
        return out


class AdamWState(BaseModel):
    """Decoupled-weight-decay Adam; moments follow `Mlp.params` order."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    lr: float = Field(default=3e-5, gt=0)
    betas: Tuple[float, float] = (0.9, 0.95)
    eps: float = Field(default=1e-8, gt=0)
    weight_decay: float = Field(default=1e-4, ge=0)
    step: int = Field(default=0, ge=0)
    exp_avg: List[np.ndarray] = []
    exp_avg_sq: List[np.ndarray] = []


class EmaState(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    rate: float = Field(default=0.999, ge=0, le=1)
    shadow: List[np.ndarray]
