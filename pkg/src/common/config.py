import math
import os
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings

from src.common.errors import ConfigError
from src.common.utils.global_messages import GlobalMessages

# Load environment variables from the correct .env file
env_file = ".env.production" if os.getenv("APP_ENV") == "production" else ".env"
load_dotenv(env_file)


class Settings(BaseSettings):
    APP_ENV: str = "development"
    DEBUG: bool = False
    LOG_LEVEL: str = "info"
    LOG_EVERY: int = 500
    DEFAULT_SEED: int = 0


settings = Settings()


def _split_list(value):
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class RunConfig(BaseModel):
    """Every knob a command reads. Unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")

    # Task and prior
    task: str = "interpolation"
    n_frames: int = Field(default=8, gt=0)
    feature_dim: int = Field(default=16, gt=0)
    eps: float = Field(default=0.1, gt=0)
    alpha: float = Field(default=1.0, ge=0)
    schedule: str = "constant"
    horizon: float = Field(default=1.0, gt=0)
    quadrature_nodes: int = Field(default=64, gt=0)
    initialization: Optional[str] = None
    downsample: int = Field(default=2, gt=0)
    noise_scale: float = Field(default=1.0, ge=0)

    # Training
    steps: int = Field(default=20000, gt=0)
    batch: int = Field(default=128, gt=0)
    lr: float = Field(default=3e-5, gt=0)
    betas: Tuple[float, float] = (0.9, 0.95)
    weight_decay: float = Field(default=1e-4, ge=0)
    ema: float = Field(default=0.999, ge=0, le=1)
    hidden: List[int] = [256, 256]
    time_embedding: int = Field(default=16, gt=0)

    # Inference and evaluation
    n_sample_steps: int = Field(default=1000, gt=0)
    eval_count: int = Field(default=64, gt=0)
    strip_scale: int = Field(default=4, gt=0)

    # Dataset
    count: int = Field(default=1024, gt=0)
    val_count: int = Field(default=64, gt=0)
    dot_width: float = Field(default=1.5, gt=0)
    speed_min: float = Field(default=0.5, ge=0)
    speed_max: float = Field(default=2.0, ge=0)

    # Oracle
    paths: int = Field(default=200000, gt=0)
    dt: float = Field(default=1e-3, gt=0)

    # Sweep
    sweep_eps: List[float] = [0.1, 1.0]
    sweep_alpha: List[float] = [0.1, 1.0]

    seed: int = Field(default=settings.DEFAULT_SEED, ge=0)

    # Files
    data: Optional[Path] = None
    checkpoint: Optional[Path] = None
    out: Optional[Path] = None
    reference: Optional[Path] = None
    prediction: Optional[Path] = None

    @field_validator("betas", "hidden", "sweep_eps", "sweep_alpha", mode="before")
    def split_lists(cls, value):
        return _split_list(value)

    @field_validator("betas")
    def check_betas(cls, value):
        if not all(0.0 <= beta < 1.0 for beta in value):
            raise ValueError("betas must lie in [0, 1)")
        return value

    @field_validator("hidden")
    def check_hidden(cls, value):
        if not value or any(width <= 0 for width in value):
            raise ValueError("hidden widths must be positive")
        return value

    @field_validator("sweep_eps", "sweep_alpha")
    def check_grid(cls, value):
        if not value:
            raise ValueError(GlobalMessages.EMPTY_GRID)
        return value

    @field_validator("sweep_eps")
    def check_grid_eps(cls, value):
        if not all(math.isfinite(eps) and eps > 0 for eps in value):
            raise ValueError(GlobalMessages.GRID_EPS)
        return value

    @field_validator("sweep_alpha")
    def check_grid_alpha(cls, value):
        if not all(math.isfinite(alpha) and alpha >= 0 for alpha in value):
            raise ValueError(GlobalMessages.GRID_ALPHA)
        return value

    def require(self, key: str) -> Path:
        """Return a path-valued key or fail with a config error."""
        value = getattr(self, key)
        if value is None:
            raise ConfigError(f"{GlobalMessages.MISSING_PATH} ({key})")
        return value

    def as_lines(self) -> List[str]:
        """Render as key=value lines, in field order."""
        lines = []
        for key, value in self.model_dump().items():
            if value is None:
                continue
            if isinstance(value, (list, tuple)):
                value = ",".join(str(item) for item in value)
            lines.append(f"{key}={value}")
        return lines


def parse_key_values(lines: List[str]) -> Dict[str, str]:
    """Parse `key=value` lines, skipping blanks and `#` comments."""
    values: Dict[str, str] = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{GlobalMessages.BAD_CONFIG_LINE} (line {number}: {raw.strip()!r})")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def parse_cli_overrides(args: List[str]) -> Dict[str, str]:
    """Turn `--key value` / `--key=value` tokens into a dict."""
    values: Dict[str, str] = {}
    index = 0
    while index < len(args):
        token = args[index]
        if not token.startswith("--"):
            raise ConfigError(f"{GlobalMessages.BAD_CONFIG_LINE} (unexpected argument {token!r})")
        key = token[2:]
        if "=" in key:
            key, value = key.split("=", 1)
        else:
            if index + 1 >= len(args):
                raise ConfigError(f"Missing value for --{key}")
            index += 1
            value = args[index]
        values[key.replace("-", "_")] = value
        index += 1
    return values


def load_run_config(path: Optional[Path] = None, overrides: Optional[Dict[str, str]] = None) -> RunConfig:
    """
    Build a RunConfig from an optional key=value file plus overrides.

    Args:
        path: Config file; missing keys take the documented defaults.
        overrides: Values from the command line; these win over the file.

    Returns:
        A validated RunConfig.
    """
    values: Dict[str, str] = {}
    if path is not None:
        try:
            values.update(parse_key_values(Path(path).read_text().splitlines()))
        except OSError as exc:
            raise ConfigError(f"Cannot read config file {path}: {exc}") from exc
    values.update(overrides or {})
    try:
        return RunConfig(**values)
    except ValidationError as exc:
        first = exc.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        if first["type"] == "extra_forbidden":
            raise ConfigError(f"{GlobalMessages.UNKNOWN_KEY} ({location})") from exc
        raise ConfigError(f"Invalid value for {location}: {first['msg']}") from exc
