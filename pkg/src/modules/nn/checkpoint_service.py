# src/modules/nn/checkpoint_service.py
"""TCVB checkpoint files.

Layout (little-endian): magic, version byte, layer count and widths (u32),
frames, features, embedding width (u32), optimizer step (u64), lr, beta1,
beta2, eps, weight decay, EMA rate (f64), then float32 arrays in parameter
order: weights/biases, first moments, second moments, EMA shadow.
"""

import struct
from pathlib import Path
from typing import List, Tuple

import numpy as np

from src.common.errors import FormatError
from src.common.utils.constant import CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from src.common.utils.global_messages import GlobalMessages
from src.common.utils.logger import get_logger

from .schemas import AdamWState, EmaState, Mlp

logger = get_logger(__name__)


def _shapes(widths: List[int]) -> List[Tuple[int, ...]]:
    shapes = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        shapes.extend([(fan_in, fan_out), (fan_out,)])
    return shapes


def encode_checkpoint(model: Mlp, opt: AdamWState, ema: EmaState) -> bytes:
    header = [CHECKPOINT_MAGIC, struct.pack("<B", CHECKPOINT_VERSION)]
    header.append(struct.pack(f"<I{len(model.widths)}I", len(model.widths), *model.widths))
    header.append(struct.pack("<III", model.frames, model.features, model.embedding_width))
    header.append(struct.pack("<Q", opt.step))
    header.append(struct.pack("<6d", opt.lr, opt.betas[0], opt.betas[1], opt.eps, opt.weight_decay, ema.rate))

    exp_avg = opt.exp_avg or [np.zeros_like(p) for p in model.params]
    exp_avg_sq = opt.exp_avg_sq or [np.zeros_like(p) for p in model.params]
    body = [
        np.ascontiguousarray(array, dtype="<f4").tobytes()
        for group in (model.params, exp_avg, exp_avg_sq, ema.shadow)
        for array in group
    ]
    return b"".join(header + body)


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.blob):
            raise FormatError(GlobalMessages.TRUNCATED, offset=len(self.blob))
        chunk = self.blob[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def array(self, shape: Tuple[int, ...]) -> np.ndarray:
        count = int(np.prod(shape))
        return np.frombuffer(self.take(4 * count), dtype="<f4").astype(np.float32).reshape(shape)


def decode_checkpoint(blob: bytes) -> Tuple[Mlp, AdamWState, EmaState]:
    reader = _Reader(blob)
    if reader.take(len(CHECKPOINT_MAGIC)) != CHECKPOINT_MAGIC:
        raise FormatError(GlobalMessages.BAD_MAGIC, offset=0)
    (version,) = reader.unpack("<B")
    if version != CHECKPOINT_VERSION:
        raise FormatError(f"{GlobalMessages.BAD_VERSION} ({version})", offset=len(CHECKPOINT_MAGIC))
    width_offset = reader.offset
    (layers,) = reader.unpack("<I")
    if layers < 2:
        raise FormatError("checkpoint declares fewer than two layer widths", offset=width_offset)
    widths = list(reader.unpack(f"<{layers}I"))
    frames, features, embedding = reader.unpack("<III")
    if widths[0] != frames * features + embedding or widths[-1] != frames * features:
        raise FormatError("layer widths disagree with the sequence shape", offset=width_offset)
    (step,) = reader.unpack("<Q")
    lr, beta1, beta2, eps, weight_decay, rate = reader.unpack("<6d")

    shapes = _shapes(widths)
    groups = [[reader.array(shape) for shape in shapes] for _ in range(4)]
    if reader.offset != len(blob):
        raise FormatError("trailing bytes after checkpoint data", offset=reader.offset)
    params, exp_avg, exp_avg_sq, shadow = groups

    model = Mlp(frames=frames, features=features, embedding_width=embedding, widths=widths,
                weights=params[0::2], biases=params[1::2])
    opt = AdamWState(lr=lr, betas=(beta1, beta2), eps=eps, weight_decay=weight_decay,
                     step=step, exp_avg=exp_avg, exp_avg_sq=exp_avg_sq)
    return model, opt, EmaState(rate=rate, shadow=shadow)


def save_checkpoint(path: Path, model: Mlp, opt: AdamWState, ema: EmaState) -> Path:
    path = Path(path)
    path.write_bytes(encode_checkpoint(model, opt, ema))
    logger.info("wrote checkpoint %s (step %d)", path, opt.step)
    return path


def load_checkpoint(path: Path) -> Tuple[Mlp, AdamWState, EmaState]:
    return decode_checkpoint(Path(path).read_bytes())
