# src/test/test_pipeline.py

import numpy as np
import pytest

from src.common.errors import ConfigError, ContractError
from src.modules.nn.nn_service import init_adamw, init_ema, init_mlp
from src.modules.pipeline import experiment_service as experiment
from src.modules.pipeline.coupling_service import (
    baseline_prediction, boundary_term, couple, degrade, linear_fill,
)
from src.modules.pipeline.sampling_service import MlpPredictor, OraclePredictor, sample, time_grid
from src.modules.pipeline.schemas import Initialization, TaskConfig, TaskKind
from src.modules.pipeline.training_service import build_training_batch, predictor_loss, train
from src.modules.prior.prior_service import build_prior
from src.modules.prior.schemas import CorrelationSchedule


def make_task(kind, **kwargs):
    return TaskConfig(kind=kind, n_frames=4, feature_dim=12, **kwargs)


def prior_for(task, alpha=1.0, eps=0.1):
    return build_prior(task.n_frames, alpha, eps, features=task.feature_dim)


def clean_batch(task, rng, batch=3):
    return rng.uniform(-1.0, 1.0, size=(batch, task.stored_frames, task.feature_dim))


ALL_TASKS = [
    (TaskKind.INTERPOLATION, Initialization.GAUSSIAN_NOISE),
    (TaskKind.INTERPOLATION, Initialization.LINEAR_INTERP),
    (TaskKind.INTERPOLATION, Initialization.STATIC_COPY),
    (TaskKind.IMAGE_TO_VIDEO, Initialization.GAUSSIAN_NOISE),
    (TaskKind.IMAGE_TO_VIDEO, Initialization.STATIC_COPY),
    (TaskKind.SUPER_RESOLUTION, Initialization.LOWRES_UPSAMPLE),
    (TaskKind.SUPER_RESOLUTION, Initialization.LOWRES_CONCAT_NOISE),
]


# ============================================================================
# TASKS AND COUPLINGS
# ============================================================================

def test_stored_layouts():
    assert make_task(TaskKind.INTERPOLATION).stored_frames == 6
    assert make_task(TaskKind.IMAGE_TO_VIDEO).stored_frames == 5
    assert make_task(TaskKind.SUPER_RESOLUTION).stored_frames == 4
    mask = make_task(TaskKind.INTERPOLATION).free_mask
    assert mask[:, 0].tolist() == [0.0, 1.0, 1.0, 1.0, 1.0, 0.0]


def test_default_initializations():
    assert make_task(TaskKind.INTERPOLATION).initialization == Initialization.GAUSSIAN_NOISE
    assert make_task(TaskKind.IMAGE_TO_VIDEO).initialization == Initialization.STATIC_COPY
    assert make_task(TaskKind.SUPER_RESOLUTION).initialization == Initialization.LOWRES_UPSAMPLE


def test_task_validation():
    with pytest.raises(ConfigError):
        make_task(TaskKind.SUPER_RESOLUTION, initialization=Initialization.GAUSSIAN_NOISE)
    with pytest.raises(ConfigError):
        TaskConfig(kind=TaskKind.SUPER_RESOLUTION, n_frames=4, feature_dim=12, downsample=5)


@pytest.mark.parametrize("kind, init", ALL_TASKS)
def test_coupling_keeps_conditioning_frames(kind, init, rng):
    task = make_task(kind, initialization=init)
    x0 = clean_batch(task, rng)
    x_T = couple(task, x0, rng)
    keep = np.ones(task.stored_frames, dtype=bool)
    keep[task.free] = False
    assert np.array_equal(x_T[:, keep], x0[:, keep])
    assert x_T.shape == x0.shape


def test_linear_fill_is_a_straight_line():
    stored = np.zeros((5, 1))
    stored[0], stored[-1] = 0.0, 4.0
    assert linear_fill(stored, 3)[:, 0].tolist() == [1.0, 2.0, 3.0]


def test_degrade_block_means():
    frames = np.array([[1.0, 3.0, -1.0, 1.0]])
    assert degrade(frames, 2).tolist() == [[2.0, 2.0, 0.0, 0.0]]
    assert np.array_equal(degrade(frames, 1), frames)


def test_static_copy_repeats_first_frame(rng):
    task = make_task(TaskKind.IMAGE_TO_VIDEO)
    x0 = clean_batch(task, rng)
    x_T = couple(task, x0, rng)
    assert np.all(x_T[:, 1:] == x0[:, :1])


def test_boundary_terms(rng):
    interp = make_task(TaskKind.INTERPOLATION)
    x = clean_batch(interp, rng, batch=2)
    b = boundary_term(interp, x, 0.5)
    assert b.shape == (2, 4, 12)
    assert np.allclose(b[:, 0], 0.5 * x[:, 0])
    assert np.allclose(b[:, -1], 0.5 * x[:, -1])
    assert np.all(b[:, 1:-1] == 0.0)

    i2v = make_task(TaskKind.IMAGE_TO_VIDEO)
    x = clean_batch(i2v, rng, batch=2)
    b = boundary_term(i2v, x, 2.0)
    assert np.allclose(b[:, 0], 2.0 * x[:, 0])
    assert np.all(b[:, 1:] == 0.0)

    sr = make_task(TaskKind.SUPER_RESOLUTION)
    assert np.all(boundary_term(sr, clean_batch(sr, rng), 1.0) == 0.0)


def test_single_free_frame_gets_both_endpoints(rng):
    task = TaskConfig(kind=TaskKind.INTERPOLATION, n_frames=1, feature_dim=12)
    x = clean_batch(task, rng, batch=1)
    b = boundary_term(task, x, 1.0)
    assert np.allclose(b[:, 0], x[:, 0] + x[:, -1])


def test_baselines(rng):
    interp = make_task(TaskKind.INTERPOLATION)
    x0 = clean_batch(interp, rng)
    guess = baseline_prediction(interp, x0)
    assert np.array_equal(guess[:, 1], x0[:, 0])
    assert np.array_equal(guess[:, 2], x0[:, 0])
    assert np.array_equal(guess[:, 3], x0[:, -1])
    assert np.array_equal(guess[:, 4], x0[:, -1])

    sr = make_task(TaskKind.SUPER_RESOLUTION)
    x0 = clean_batch(sr, rng)
    assert np.allclose(baseline_prediction(sr, x0), degrade(x0, 2))


# ============================================================================
# TRAINING
# ============================================================================

@pytest.mark.parametrize("kind, init", ALL_TASKS)
def test_oracle_predictor_has_zero_loss(kind, init, rng):
    task = make_task(kind, initialization=init)
    x0 = clean_batch(task, rng, batch=4)
    t = rng.uniform(size=4)
    x_t = build_training_batch(prior_for(task), task, x0, t, rng)
    assert predictor_loss(OraclePredictor(x0), task, x_t, t, x0) == 0.0


def test_training_batch_endpoints(rng):
    task = make_task(TaskKind.INTERPOLATION, initialization=Initialization.LINEAR_INTERP)
    x0 = clean_batch(task, rng, batch=2)
    at_start = build_training_batch(prior_for(task), task, x0, np.zeros(2), rng)
    assert np.allclose(at_start, x0, atol=1e-12)
    at_end = build_training_batch(prior_for(task), task, x0, np.ones(2), rng)
    assert np.allclose(at_end, couple(task, x0, rng), atol=1e-6)


def test_training_is_deterministic(small_config):
    task = experiment.task_from_config(small_config)
    spec = experiment.prior_from_config(small_config)
    data = experiment.dataset_from_config(small_config).train
    first = experiment.fit(small_config, spec, task, data)
    second = experiment.fit(small_config, spec, task, data)
    assert first.losses == second.losses
    assert all(np.array_equal(a, b) for a, b in zip(first.model.params, second.model.params))
    assert len(first.losses) == small_config.steps
    assert first.opt.step == small_config.steps


def test_training_rejects_mismatched_shapes(rng):
    task = make_task(TaskKind.INTERPOLATION)
    spec = prior_for(task)
    model = init_mlp(task.stored_frames, task.feature_dim, [8], 4)
    opt, ema = init_adamw(model), init_ema(model)
    wrong = rng.uniform(size=(3, task.stored_frames + 1, task.feature_dim))
    with pytest.raises(ContractError):
        train(spec, task, wrong, model, opt, ema, 1, 2, rng)
    other = init_mlp(task.stored_frames - 1, task.feature_dim, [8], 4)
    with pytest.raises(ContractError):
        train(spec, task, clean_batch(task, rng), other, init_adamw(other), init_ema(other), 1, 2, rng)


# ============================================================================
# SAMPLING
# ============================================================================

def test_time_grid():
    grid = time_grid(1.0, 4)
    assert grid.tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert time_grid(0.7, 3)[-1] <= 0.7


@pytest.mark.parametrize("n_steps", [1, 10, 1000])
@pytest.mark.parametrize("kind, init", ALL_TASKS)
def test_oracle_sampling_recovers_the_data(kind, init, n_steps, rng):
    task = make_task(kind, initialization=init)
    x0 = clean_batch(task, rng, batch=2)
    x_T = couple(task, x0, rng)
    out = sample(prior_for(task), task, OraclePredictor(x0), x_T, n_steps, rng)
    assert np.max(np.abs(out - x0)) <= 1e-6


def test_sampling_with_a_schedule_that_turns_negative(rng):
    task = make_task(TaskKind.INTERPOLATION)
    spec = build_prior(task.n_frames, 1.0, 0.1, features=task.feature_dim, schedule=CorrelationSchedule.parse("linear:1,3"))
    x0 = clean_batch(task, rng, batch=2)
    x_T = couple(task, x0, rng)
    t = rng.uniform(size=2)
    assert np.all(np.isfinite(build_training_batch(spec, task, x0, t, rng)))
    out = sample(spec, task, OraclePredictor(x0), x_T, 10, rng)
    assert np.max(np.abs(out - x0)) <= 1e-6


def test_conditioning_frames_are_bit_identical(rng):
    task = make_task(TaskKind.INTERPOLATION)
    model = init_mlp(task.stored_frames, task.feature_dim, [8], 4, seed=2)
    x_T = couple(task, clean_batch(task, rng), rng)
    out = sample(prior_for(task), task, MlpPredictor(model), x_T, 5, rng)
    assert np.array_equal(out[:, 0], x_T[:, 0])
    assert np.array_equal(out[:, -1], x_T[:, -1])


def test_one_step_returns_the_prediction(rng):
    task = make_task(TaskKind.IMAGE_TO_VIDEO)
    model = init_mlp(task.stored_frames, task.feature_dim, [8], 4, seed=5)
    predictor = MlpPredictor(model)
    x_T = couple(task, clean_batch(task, rng), rng)
    out = sample(prior_for(task), task, predictor, x_T, 1, rng)
    assert np.allclose(out[:, task.free], predictor(x_T, 1.0)[:, task.free], atol=1e-12)


def test_sampling_contract_errors(rng):
    task = make_task(TaskKind.INTERPOLATION)
    x = clean_batch(task, rng)
    with pytest.raises(ContractError):
        sample(prior_for(task), task, OraclePredictor(x), x, 0, rng)
    with pytest.raises(ContractError):
        sample(prior_for(task), task, OraclePredictor(x[:, 1:]), x[:, 1:], 3, rng)


@pytest.mark.slow
def test_training_reduces_the_loss_end_to_end(small_config):
    cfg = small_config.model_copy(update={"steps": 2000, "lr": 1e-3, "batch": 16, "hidden": [64, 64]})
    task = experiment.task_from_config(cfg)
    spec = experiment.prior_from_config(cfg)
    dataset = experiment.dataset_from_config(cfg)
    result = experiment.fit(cfg, spec, task, dataset.train)
    assert np.mean(result.losses[-200:]) < 0.5 * np.mean(result.losses[:200])
    model_eval, baseline_eval = experiment.evaluate_run(cfg, spec, task, result, dataset)
    assert np.isfinite(model_eval.psnr) and np.isfinite(baseline_eval.psnr)
    assert -1.0 <= model_eval.ssim <= 1.0
