# common/utils/global_functions.py
from pathlib import Path
from typing import Iterable

import numpy as np

from src.common.errors import ContractError
from src.common.utils.constant import SIDECAR_SUFFIX


def as_float64(array) -> np.ndarray:
    """Return the input as a float64 array (copy only when needed)."""
    return np.asarray(array, dtype=np.float64)


def check_sequence(array: np.ndarray, n: int, name: str = "array") -> np.ndarray:
    """Validate a [..., n, D] sequence array and return it as float64."""
    array = as_float64(array)
    if array.ndim < 2 or array.shape[-2] != n:
        raise ContractError(f"{name} must have shape [..., {n}, D], got {array.shape}")
    return array


def time_array(t) -> np.ndarray:
    """Times as float64 with a trailing axis ready to broadcast against eigenvalues."""
    return as_float64(t)[..., None]


def sidecar_path(path: Path) -> Path:
    return Path(str(path) + SIDECAR_SUFFIX)


def write_sidecar(path: Path, lines: Iterable[str], command: str) -> Path:
    """Write the config that produced `path` next to it."""
    target = sidecar_path(path)
    body = [f"# produced by: {command}", *lines]
    target.write_text("\n".join(body) + "\n")
    return target
