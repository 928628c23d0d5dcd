# src/modules/prior/schemas.py
"""Prior module Pydantic schemas."""

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.common.errors import ConfigError, InvalidDimensionError
from src.common.utils.global_messages import GlobalMessages
from src.modules.spectral.schemas import SpectralOperator


class ScheduleKind(str, Enum):
    CONSTANT = "constant"
    LINEAR = "linear"
    QUADRATIC = "quadratic"
    EXPONENTIAL = "exponential"


class CorrelationSchedule(BaseModel):
    """Time scaling f(t) of the drift.

    linear means f(t) = a - c t, quadratic f(t) = (1 - t)^2 and exponential
    f(t) = exp(-r t).
    """

    model_config = ConfigDict(frozen=True)

    kind: ScheduleKind = ScheduleKind.CONSTANT
    a: float = 1.0
    c: float = 1.0
    r: float = Field(default=1.0, gt=0)
    quadrature_nodes: int = Field(default=64, gt=0)

    @property
    def is_constant(self) -> bool:
        return self.kind == ScheduleKind.CONSTANT

    def rate(self, t) -> np.ndarray:
        """f(t)."""
        t = np.asarray(t, dtype=np.float64)
        if self.kind == ScheduleKind.LINEAR:
            return self.a - self.c * t
        if self.kind == ScheduleKind.QUADRATIC:
            return (1.0 - t) ** 2
        if self.kind == ScheduleKind.EXPONENTIAL:
            return np.exp(-self.r * t)
        return np.ones_like(t)

    @classmethod
    def parse(cls, text: str, quadrature_nodes: int = 64) -> "CorrelationSchedule":
        """Parse `constant`, `linear:a,c`, `quadratic` or `exponential:r`."""
        name, _, args = text.strip().partition(":")
        try:
            kind = ScheduleKind(name.strip().lower())
            values = [float(part) for part in args.split(",") if part.strip()]
            if kind == ScheduleKind.LINEAR:
                a, c = values
                return cls(kind=kind, a=a, c=c, quadrature_nodes=quadrature_nodes)
            if kind == ScheduleKind.EXPONENTIAL:
                (r,) = values
                return cls(kind=kind, r=r, quadrature_nodes=quadrature_nodes)
            if values:
                raise ValueError(f"{kind.value} takes no parameters")
            return cls(kind=kind, quadrature_nodes=quadrature_nodes)
        except ValueError as exc:
            raise ConfigError(f"Invalid schedule {text!r}: {exc}") from exc

    def describe(self) -> str:
        if self.kind == ScheduleKind.LINEAR:
            return f"linear:{self.a},{self.c}"
        if self.kind == ScheduleKind.EXPONENTIAL:
            return f"exponential:{self.r}"
        return self.kind.value


class PriorSpec(BaseModel):
    """Full description of dX = f(t)(alpha A X + b) dt + sqrt(eps) dW.

    `b` is the effective boundary drift, shape [..., N, D]; leading axes, when
    present, line up with the batch axes of the arrays passed to operations.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    op: SpectralOperator
    eps: float = Field(gt=0)
    b: np.ndarray
    horizon: float = Field(default=1.0, gt=0)
    schedule: CorrelationSchedule = CorrelationSchedule()

    @model_validator(mode="after")
    def check_boundary(self):
        if self.b.ndim < 2 or self.b.shape[-2] != self.op.n:
            raise InvalidDimensionError(f"{GlobalMessages.BOUNDARY_ROWS} (n={self.op.n}, b shape {self.b.shape})")
        return self

    @property
    def n(self) -> int:
        return self.op.n

    def with_boundary(self, b: np.ndarray) -> "PriorSpec":
        """Same prior with a different boundary term (validated)."""
        return PriorSpec(op=self.op, eps=self.eps, b=np.asarray(b, dtype=np.float64),
                         horizon=self.horizon, schedule=self.schedule)


class GaussianStats(BaseModel):
    """Gaussian over [N, D] sequences with covariance V diag(mode_var) V^T per column."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    op: SpectralOperator
    mean: np.ndarray
    mode_var: np.ndarray

    def covariance(self) -> np.ndarray:
        """Dense N x N covariance shared by all feature columns."""
        basis = self.op.basis
        return (basis * self.mode_var[..., None, :]) @ basis.T
