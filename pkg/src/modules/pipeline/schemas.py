# src/modules/pipeline/schemas.py
"""Pipeline module Pydantic schemas."""

from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.common.errors import ConfigError
from src.modules.nn.schemas import AdamWState, EmaState, Mlp


# ============================================================================
# ENUMS
# ============================================================================

class TaskKind(str, Enum):
    INTERPOLATION = "interpolation"
    IMAGE_TO_VIDEO = "image_to_video"
    SUPER_RESOLUTION = "super_resolution"


class Initialization(str, Enum):
    GAUSSIAN_NOISE = "gaussian_noise"
    LINEAR_INTERP = "linear_interp"
    STATIC_COPY = "static_copy"
    LOWRES_UPSAMPLE = "lowres_upsample"
    LOWRES_CONCAT_NOISE = "lowres_concat_noise"


DEFAULT_INITIALIZATION = {
    TaskKind.INTERPOLATION: Initialization.GAUSSIAN_NOISE,
    TaskKind.IMAGE_TO_VIDEO: Initialization.STATIC_COPY,
    TaskKind.SUPER_RESOLUTION: Initialization.LOWRES_UPSAMPLE,
}

ALLOWED_INITIALIZATIONS = {
    TaskKind.INTERPOLATION: {
        Initialization.GAUSSIAN_NOISE, Initialization.LINEAR_INTERP, Initialization.STATIC_COPY,
    },
    TaskKind.IMAGE_TO_VIDEO: {Initialization.GAUSSIAN_NOISE, Initialization.STATIC_COPY},
    TaskKind.SUPER_RESOLUTION: {Initialization.LOWRES_UPSAMPLE, Initialization.LOWRES_CONCAT_NOISE},
}


# ============================================================================
# TASK
# ============================================================================

class TaskConfig(BaseModel):
    """What is generated and what is held fixed.

    Sequences are stored with their conditioning frames: N + 2 frames for
    interpolation (x^0, N free frames, x^{N+1}), N + 1 for image-to-video
    (x^0 then N free frames) and N for super-resolution.
    """

    kind: TaskKind = TaskKind.INTERPOLATION
    n_frames: int = Field(default=8, gt=0)
    feature_dim: int = Field(default=16, gt=0)
    initialization: Optional[Initialization] = None
    downsample: int = Field(default=2, gt=0)
    noise_scale: float = Field(default=1.0, ge=0)

    @model_validator(mode="after")
    def check_initialization(self):
        if self.initialization is None:
            self.initialization = DEFAULT_INITIALIZATION[self.kind]
        if self.initialization not in ALLOWED_INITIALIZATIONS[self.kind]:
            raise ConfigError(f"initialization {self.initialization.value} does not apply to {self.kind.value}")
        if self.kind == TaskKind.SUPER_RESOLUTION and self.feature_dim % self.downsample:
            raise ConfigError(f"downsample={self.downsample} must divide feature_dim={self.feature_dim}")
        return self

    @property
    def stored_frames(self) -> int:
        if self.kind == TaskKind.INTERPOLATION:
            return self.n_frames + 2
        if self.kind == TaskKind.IMAGE_TO_VIDEO:
            return self.n_frames + 1
        return self.n_frames

    @property
    def free(self) -> slice:
        """Stored-frame slice of the block the prior acts on."""
        if self.kind == TaskKind.SUPER_RESOLUTION:
            return slice(0, self.n_frames)
        return slice(1, self.n_frames + 1)

    @property
    def free_mask(self) -> np.ndarray:
        """1.0 on free stored frames, 0.0 on conditioning frames; shape [stored, 1]."""
        mask = np.zeros((self.stored_frames, 1))
        mask[self.free] = 1.0
        return mask


# ============================================================================
# DATA
# ============================================================================

class DatasetParams(BaseModel):
    count: int = Field(gt=0)
    frames: int = Field(gt=0)
    features: int = Field(gt=0)
    dot_width: float = Field(default=1.5, gt=0)
    speed_min: float = Field(default=0.5, ge=0)
    speed_max: float = Field(default=2.0, ge=0)
    val_count: int = Field(default=64, ge=0)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def check_speeds(self):
        if self.speed_max < self.speed_min:
            raise ConfigError("speed_max must not be below speed_min")
        return self


class SyntheticDataset(BaseModel):
    """Bouncing-dot sequences in [-1, 1] with a disjoint train/validation split.

    `positions` and `velocities` are only known for freshly generated data.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    sequences: np.ndarray
    train_idx: np.ndarray
    val_idx: np.ndarray
    params: Optional[DatasetParams] = None
    positions: Optional[np.ndarray] = None
    velocities: Optional[np.ndarray] = None

    @property
    def train(self) -> np.ndarray:
        return self.sequences[self.train_idx]

    @property
    def validation(self) -> np.ndarray:
        """Held-out sequences; the full set when no split was reserved."""
        if self.val_idx.size == 0:
            return self.sequences
        return self.sequences[self.val_idx]


# ============================================================================
# RESULTS
# ============================================================================

class TrainResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    model: Mlp
    opt: AdamWState
    ema: EmaState
    losses: List[float]

    @property
    def final_loss(self) -> float:
        return self.losses[-1]


class Evaluation(BaseModel):
    psnr: float
    ssim: float


class SweepRow(BaseModel):
    """One CSV row; metric fields are None when the cell failed."""

    seed: int
    task: TaskKind
    eps: float
    alpha: float
    psnr: Optional[float] = None
    ssim: Optional[float] = None
    loss: Optional[float] = None
    failed: bool = False
