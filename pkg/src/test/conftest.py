# src/test/conftest.py

import numpy as np
import pytest

from src.common.config import load_run_config
from src.modules.prior.prior_service import build_prior


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False, help="run slow end-to-end tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def spec():
    """N=5, D=3 correlated prior with a random boundary term."""
    b = np.random.default_rng(7).normal(scale=0.5, size=(5, 3))
    return build_prior(5, 0.8, 0.3, b=b)


@pytest.fixture
def small_config():
    """Interpolation run small enough for unit tests."""
    return load_run_config(overrides={
        "n_frames": "4",
        "feature_dim": "12",
        "count": "12",
        "val_count": "4",
        "steps": "5",
        "batch": "4",
        "hidden": "16",
        "time_embedding": "4",
        "n_sample_steps": "5",
        "eval_count": "4",
        "seed": "3",
    })
