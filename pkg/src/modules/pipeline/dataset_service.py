# src/modules/pipeline/dataset_service.py
"""Bouncing-dot data, TCDS dataset files and PGM frame strips."""

import struct
from pathlib import Path

import numpy as np

from src.common.errors import ContractError, FormatError
from src.common.utils.constant import DATASET_MAGIC, DATASET_VERSION
from src.common.utils.global_messages import GlobalMessages
from src.common.utils.logger import get_logger

from .schemas import DatasetParams, SyntheticDataset

logger = get_logger(__name__)

HEADER = struct.Struct("<4sBIII")


# ============================================================================
# GENERATION
# ============================================================================

def reflect(position: np.ndarray, length: int) -> np.ndarray:
    """Fold unbounded positions into [0, length - 1] by mirror reflection."""
    if length == 1:
        return np.zeros_like(position)
    period = 2.0 * (length - 1)
    wrapped = np.mod(position, period)
    return np.where(wrapped <= length - 1, wrapped, period - wrapped)


def render(positions: np.ndarray, features: int, width: float) -> np.ndarray:
    """Gaussian bump of the given width at each position, mapped to [-1, 1]."""
    grid = np.arange(features, dtype=np.float64)
    bump = np.exp(-((grid - positions[..., None]) ** 2) / (2.0 * width ** 2))
    return 2.0 * bump - 1.0


def split_indices(count: int, val_count: int, seed: int):
    """Disjoint (train, validation) index arrays; training keeps at least one sequence."""
    order = np.random.default_rng([seed, 1]).permutation(count)
    val_count = min(val_count, count - 1)
    return np.sort(order[val_count:]), np.sort(order[:val_count])


def generate(params: DatasetParams) -> SyntheticDataset:
    """
    Draw `count` bouncing-dot sequences.

    Each sequence starts at a uniform position with a uniform speed in
    [speed_min, speed_max] and a random direction; the dot advances by its
    velocity per frame and reflects at both ends of the signal.
    """
    rng = np.random.default_rng(params.seed)
    start = rng.uniform(0.0, params.features - 1, size=params.count)
    speed = rng.uniform(params.speed_min, params.speed_max, size=params.count)
    direction = rng.choice([-1.0, 1.0], size=params.count)
    velocities = speed * direction

    steps = np.arange(params.frames, dtype=np.float64)
    positions = reflect(start[:, None] + velocities[:, None] * steps, params.features)
    sequences = render(positions, params.features, params.dot_width)

    train_idx, val_idx = split_indices(params.count, params.val_count, params.seed)
    return SyntheticDataset(
        sequences=sequences, train_idx=train_idx, val_idx=val_idx,
        params=params, positions=positions, velocities=velocities,
    )


# ============================================================================
# TCDS FILES
# ============================================================================

def encode_sequences(sequences: np.ndarray) -> bytes:
    sequences = np.asarray(sequences)
    if sequences.ndim != 3:
        raise ContractError(f"expected [count, frames, features], got {sequences.shape}")
    count, frames, features = sequences.shape
    header = HEADER.pack(DATASET_MAGIC, DATASET_VERSION, count, frames, features)
    return header + np.ascontiguousarray(sequences, dtype="<f4").tobytes()


def decode_sequences(blob: bytes) -> np.ndarray:
    if len(blob) < HEADER.size:
        raise FormatError(GlobalMessages.TRUNCATED, offset=len(blob))
    magic, version, count, frames, features = HEADER.unpack_from(blob)
    if magic != DATASET_MAGIC:
        raise FormatError(GlobalMessages.BAD_MAGIC, offset=0)
    if version != DATASET_VERSION:
        raise FormatError(f"{GlobalMessages.BAD_VERSION} ({version})", offset=len(DATASET_MAGIC))
    expected = HEADER.size + 4 * count * frames * features
    if len(blob) < expected:
        raise FormatError(GlobalMessages.TRUNCATED, offset=len(blob))
    if len(blob) > expected:
        raise FormatError("trailing bytes after dataset", offset=expected)
    data = np.frombuffer(blob, dtype="<f4", offset=HEADER.size, count=count * frames * features)
    return data.astype(np.float64).reshape(count, frames, features)


def write_sequences(path: Path, sequences: np.ndarray) -> Path:
    path = Path(path)
    path.write_bytes(encode_sequences(sequences))
    logger.info("wrote %d sequences to %s", len(sequences), path)
    return path


def read_sequences(path: Path) -> np.ndarray:
    return decode_sequences(Path(path).read_bytes())


def load_dataset(path: Path, val_count: int, seed: int) -> SyntheticDataset:
    """Read a TCDS file and re-derive its split from (count, val_count, seed)."""
    sequences = read_sequences(path)
    train_idx, val_idx = split_indices(len(sequences), val_count, seed)
    return SyntheticDataset(sequences=sequences, train_idx=train_idx, val_idx=val_idx)


# ============================================================================
# FRAME STRIPS
# ============================================================================

def frame_strip(sequence: np.ndarray, scale: int = 4) -> bytes:
    """Binary PGM of one [frames, features] sequence, frames side by side."""
    pixels = np.clip(np.rint((np.asarray(sequence) + 1.0) * 127.5), 0, 255).astype(np.uint8)
    row = np.repeat(pixels.reshape(1, -1), scale, axis=1)
    image = np.repeat(row, scale, axis=0)
    height, width = image.shape
    return f"P5\n{width} {height}\n255\n".encode("ascii") + image.tobytes()


def export_strips(sequences: np.ndarray, directory: Path, scale: int = 4) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for index, sequence in enumerate(sequences):
        (directory / f"seq_{index:04d}.pgm").write_bytes(frame_strip(sequence, scale))
    logger.info("wrote %d frame strips to %s", len(sequences), directory)
    return directory
