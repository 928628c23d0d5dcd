# src/test/test_dataset.py

import numpy as np
import pytest

from src.common.errors import ConfigError, FormatError
from src.modules.pipeline.dataset_service import (
    decode_sequences, encode_sequences, export_strips, frame_strip, generate, load_dataset, read_sequences,
    reflect, render, write_sequences,
)
from src.modules.pipeline.schemas import DatasetParams


@pytest.fixture
def params():
    return DatasetParams(count=10, frames=10, features=16, val_count=3, seed=7)


def test_generation_is_deterministic(params):
    first, second = generate(params), generate(params)
    assert np.array_equal(first.sequences, second.sequences)
    assert encode_sequences(first.sequences) == encode_sequences(second.sequences)


def test_values_stay_in_range(params):
    data = generate(params).sequences
    assert data.shape == (10, 10, 16)
    assert data.min() >= -1.0 and data.max() <= 1.0


def test_motion_follows_reflection(params):
    data = generate(params)
    for positions, velocity in zip(data.positions, data.velocities):
        raw = positions[0] + velocity * np.arange(params.frames)
        unfolded = reflect(raw, params.features)
        assert np.allclose(positions, unfolded)
        assert np.all((positions >= 0) & (positions <= params.features - 1))
    assert np.allclose(data.sequences, render(data.positions, params.features, params.dot_width))


def test_reflect_bounces_off_both_walls():
    assert reflect(np.array([16.0]), 16)[0] == pytest.approx(14.0)
    assert reflect(np.array([-2.0]), 16)[0] == pytest.approx(2.0)
    assert reflect(np.array([31.0]), 16)[0] == pytest.approx(1.0)


def test_split_is_disjoint_and_complete(params):
    data = generate(params)
    assert len(data.val_idx) == 3
    assert not set(data.train_idx) & set(data.val_idx)
    assert sorted(set(data.train_idx) | set(data.val_idx)) == list(range(10))


def test_single_sequence_keeps_it_for_training():
    data = generate(DatasetParams(count=1, frames=4, features=12, val_count=64))
    assert list(data.train_idx) == [0]
    assert data.validation.shape == (1, 4, 12)


def test_speed_range_validated():
    with pytest.raises(ConfigError):
        DatasetParams(count=2, frames=3, features=4, speed_min=2.0, speed_max=1.0)


def test_file_round_trip_keeps_split(params, tmp_path):
    data = generate(params)
    path = write_sequences(tmp_path / "data.tcds", data.sequences)
    loaded = load_dataset(path, params.val_count, params.seed)
    assert np.allclose(loaded.sequences, data.sequences, atol=1e-6)
    assert np.array_equal(loaded.val_idx, data.val_idx)
    assert path.read_bytes()[:4] == b"TCDS"


def test_bad_files(params):
    blob = encode_sequences(generate(params).sequences)
    with pytest.raises(FormatError, match="offset 0"):
        decode_sequences(b"TCVB" + blob[4:])
    with pytest.raises(FormatError, match="offset 4"):
        decode_sequences(blob[:4] + bytes([2]) + blob[5:])
    with pytest.raises(FormatError):
        decode_sequences(blob[:-1])
    with pytest.raises(FormatError):
        decode_sequences(blob[:6])


def test_frame_strip_layout():
    sequence = np.array([[-1.0, 1.0], [0.0, 1.0], [1.0, -1.0]])
    image = frame_strip(sequence, scale=2)
    assert image.startswith(b"P5\n12 2\n255\n")
    body = np.frombuffer(image[len(b"P5\n12 2\n255\n"):], dtype=np.uint8).reshape(2, 12)
    assert list(body[0]) == [0, 0, 255, 255, 128, 128, 255, 255, 255, 255, 0, 0]
    assert np.array_equal(body[0], body[1])


def test_export_strips(params, tmp_path):
    data = generate(params).sequences[:3]
    directory = export_strips(data, tmp_path / "strips", scale=1)
    assert sorted(p.name for p in directory.iterdir()) == ["seq_0000.pgm", "seq_0001.pgm", "seq_0002.pgm"]
    assert read_sequences(write_sequences(tmp_path / "d.tcds", data)).shape == (3, 10, 16)
