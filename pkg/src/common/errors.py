# src/common/errors.py
"""Exception hierarchy shared by every module.

Each error carries the process exit code the command line maps it to.
"""

from typing import List, Optional

from src.common.utils.global_messages import GlobalMessages


class TcvbmError(Exception):
    """Base class for all domain errors."""

    exit_code: int = 1
    default_message: str = "Unexpected error."

    def __init__(self, detail: Optional[str] = None):
        self.detail = detail or self.default_message
        super().__init__(self.detail)


class InvalidDimensionError(TcvbmError):
    default_message = GlobalMessages.INVALID_DIMENSION


class RangeError(TcvbmError):
    default_message = GlobalMessages.TIME_OUT_OF_RANGE


class ArgumentOrderError(TcvbmError):
    default_message = GlobalMessages.TIME_ORDER


class SingularCovarianceError(TcvbmError):
    default_message = GlobalMessages.SINGULAR_COVARIANCE


class SingularMatrixError(TcvbmError):
    default_message = GlobalMessages.SINGULAR_MATRIX


class ContractError(TcvbmError):
    default_message = GlobalMessages.SHAPE_MISMATCH


class SimulationDivergedError(TcvbmError):
    default_message = GlobalMessages.SIMULATION_DIVERGED


class TrainingDivergedError(TcvbmError):
    default_message = GlobalMessages.TRAINING_DIVERGED

    def __init__(self, detail: Optional[str] = None, trace: Optional[List[float]] = None):
        super().__init__(detail)
        self.trace = list(trace or [])


class WindowError(TcvbmError):
    default_message = GlobalMessages.WINDOW_TOO_LARGE


class ConfigError(TcvbmError):
    exit_code = 2
    default_message = GlobalMessages.BAD_CONFIG_LINE


class FormatError(TcvbmError):
    exit_code = 3
    default_message = GlobalMessages.BAD_MAGIC

    def __init__(self, detail: Optional[str] = None, offset: int = 0):
        self.offset = offset
        super().__init__(f"{detail or self.default_message} (at byte offset {offset})")
