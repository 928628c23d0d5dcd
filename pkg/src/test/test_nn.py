# src/test/test_nn.py

import numpy as np
import pytest

from src.common.errors import ContractError, FormatError, TrainingDivergedError
from src.modules.nn.checkpoint_service import decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint
from src.modules.nn.nn_service import (
    adamw_step, backward, ema_model, ema_update, forward, init_adamw, init_ema, init_mlp,
    numerical_gradients, time_embedding,
)
from src.modules.nn.schemas import MlpGrads


@pytest.fixture
def model():
    return init_mlp(2, 4, [16], embedding_width=4, seed=0)


def zero_grads(model):
    return MlpGrads(weights=[np.zeros_like(w) for w in model.weights],
                    biases=[np.zeros_like(b) for b in model.biases])


def test_time_embedding_is_bounded_and_deterministic():
    t = np.linspace(0.0, 1.0, 11)
    first = time_embedding(t, 16)
    assert first.shape == (11, 16)
    assert np.all(np.abs(first) <= 1.0)
    assert np.array_equal(first, time_embedding(t, 16))
    assert time_embedding(t, 5).shape == (11, 5)


def test_forward_shapes(model, rng):
    single = rng.normal(size=(2, 4))
    batch = rng.normal(size=(3, 2, 4))
    assert forward(model, single, 0.3).shape == (2, 4)
    assert forward(model, batch, np.array([0.1, 0.2, 0.3])).shape == (3, 2, 4)
    with pytest.raises(ContractError):
        forward(model, rng.normal(size=(3, 4)), 0.3)


def test_init_is_seeded(rng):
    x = rng.normal(size=(2, 4))
    a = forward(init_mlp(2, 4, [16], 4, seed=9), x, 0.5)
    b = forward(init_mlp(2, 4, [16], 4, seed=9), x, 0.5)
    assert np.array_equal(a, b)


def test_zero_weights_give_bias_output(model, rng):
    for weight in model.weights:
        weight[...] = 0.0
    model.biases[-1][...] = 0.25
    out = forward(model, rng.normal(size=(2, 4)), 0.7)
    assert np.allclose(out, 0.25)


def test_loss_is_zero_at_own_prediction(model, rng):
    x = rng.normal(size=(3, 2, 4))
    t = np.array([0.2, 0.4, 0.6])
    loss, grads = backward(model, x, t, forward(model, x, t))
    assert loss == 0.0
    assert all(np.all(g == 0.0) for g in grads.params)


def test_output_gradient_is_linear_in_residual(model, rng):
    model64 = model.astype(np.float64)
    x = rng.normal(size=(3, 2, 4))
    t = np.array([0.2, 0.4, 0.6])
    prediction = forward(model64, x, t)
    direction = rng.normal(size=prediction.shape)
    _, once = backward(model64, x, t, prediction - direction)
    _, twice = backward(model64, x, t, prediction - 2.0 * direction)
    assert np.allclose(twice.weights[-1], 2.0 * once.weights[-1], rtol=1e-12, atol=1e-14)
    assert np.allclose(twice.biases[-1], 2.0 * once.biases[-1], rtol=1e-12, atol=1e-14)


def test_mask_restricts_the_loss(model, rng):
    model64 = model.astype(np.float64)
    x = rng.normal(size=(2, 2, 4))
    target = rng.normal(size=(2, 2, 4))
    mask = np.array([[0.0], [1.0]])
    loss, _ = backward(model64, x, 0.5, target, mask=mask)
    residual = forward(model64, x, 0.5)[:, 1, :] - target[:, 1, :]
    assert loss == pytest.approx(np.mean(residual ** 2), rel=1e-12)


def test_gradients_match_finite_differences(rng):
    model = init_mlp(2, 4, [16], embedding_width=4, seed=1).astype(np.float64)
    x = 0.5 * rng.normal(size=(3, 2, 4))
    target = 0.5 * rng.normal(size=(3, 2, 4))
    t = rng.uniform(size=3)
    _, grads = backward(model, x, t, target)
    for analytic, numeric in zip(grads.params, numerical_gradients(model, x, t, target)):
        gap = np.abs(analytic - numeric)
        ok = (gap <= 1e-7) | (gap <= 1e-4 * np.abs(numeric))
        assert np.all(ok)


def test_non_finite_loss_raises(model, rng):
    x = rng.normal(size=(2, 4))
    target = np.full((2, 4), np.nan)
    with pytest.raises(TrainingDivergedError):
        backward(model, x, 0.5, target)


def test_adamw_zero_gradient_without_decay_is_a_no_op(model):
    before = [p.copy() for p in model.params]
    opt = init_adamw(model, lr=1e-2, weight_decay=0.0)
    adamw_step(opt, model, zero_grads(model))
    assert all(np.array_equal(a, b) for a, b in zip(before, model.params))
    assert opt.step == 1


def test_adamw_first_step_closed_form(model, rng):
    model = model.astype(np.float64)
    before = [p.copy() for p in model.params]
    grads = MlpGrads(weights=[rng.normal(size=w.shape) for w in model.weights],
                     biases=[rng.normal(size=b.shape) for b in model.biases])
    opt = init_adamw(model, lr=1e-3, weight_decay=0.0)
    adamw_step(opt, model, grads)
    for old, new, g in zip(before, model.params, grads.params):
        assert np.allclose(new - old, -1e-3 * g / (np.abs(g) + opt.eps), rtol=1e-6, atol=1e-12)


def test_adamw_decay_shrinks_weights(model):
    before = [p.copy() for p in model.params]
    opt = init_adamw(model, lr=0.1, weight_decay=0.5)
    adamw_step(opt, model, zero_grads(model))
    for old, new in zip(before, model.params):
        assert np.allclose(new, old * (1 - 0.05), rtol=1e-6)


def test_adamw_minimises_a_convex_quadratic():
    model = init_mlp(1, 1, [1], embedding_width=0, seed=0).astype(np.float64)
    target = [np.full_like(p, 3.0) for p in model.params]
    opt = init_adamw(model, lr=5e-2, weight_decay=0.0)
    losses = []
    for _ in range(1000):
        grads = [2.0 * (p - c) for p, c in zip(model.params, target)]
        losses.append(sum(float(np.sum((p - c) ** 2)) for p, c in zip(model.params, target)))
        adamw_step(opt, model, MlpGrads(weights=grads[0::2], biases=grads[1::2]))
    assert losses[-1] < 1e-2 * losses[0]
    assert losses[500] < losses[0]


def test_ema_rates(model):
    frozen = init_ema(model, rate=1.0)
    snapshot = [s.copy() for s in frozen.shadow]
    follow = init_ema(model, rate=0.0)
    for p in model.params:
        p += 1.0
    ema_update(frozen, model)
    ema_update(follow, model)
    assert all(np.array_equal(a, b) for a, b in zip(frozen.shadow, snapshot))
    assert all(np.array_equal(a, b) for a, b in zip(follow.shadow, model.params))


def test_ema_converges_geometrically(model):
    ema = init_ema(model, rate=0.5)
    start = [s.copy() for s in ema.shadow]
    for p in model.params:
        p += 1.0
    for _ in range(10):
        ema_update(ema, model)
    for s, p, s0 in zip(ema.shadow, model.params, start):
        assert np.allclose(p - s, 0.5 ** 10 * (p - s0), atol=1e-6)


def test_ema_model_uses_shadow_weights(model):
    ema = init_ema(model, rate=0.9)
    for shadow in ema.shadow:
        shadow[...] = 0.0
    averaged = ema_model(model, ema)
    assert all(np.all(w == 0.0) for w in averaged.weights)
    assert not all(np.all(w == 0.0) for w in model.weights)


def test_checkpoint_restores_everything(model, rng, tmp_path):
    opt = init_adamw(model, lr=1e-3)
    ema = init_ema(model, rate=0.99)
    x = rng.normal(size=(3, 2, 4))
    _, grads = backward(model, x, 0.5, rng.normal(size=(3, 2, 4)))
    adamw_step(opt, model, grads)
    ema_update(ema, model)

    path = save_checkpoint(tmp_path / "model.tcvb", model, opt, ema)
    loaded, loaded_opt, loaded_ema = load_checkpoint(path)
    assert loaded.widths == model.widths
    assert loaded_opt.step == 1
    assert loaded_opt.betas == opt.betas
    assert loaded_ema.rate == ema.rate
    assert all(np.array_equal(a, b) for a, b in zip(loaded.params, model.params))
    assert all(np.array_equal(a, b) for a, b in zip(loaded_opt.exp_avg_sq, opt.exp_avg_sq))
    assert all(np.array_equal(a, b) for a, b in zip(loaded_ema.shadow, ema.shadow))
    assert np.array_equal(forward(loaded, x, 0.5), forward(model, x, 0.5))


def test_checkpoint_format_errors(model):
    blob = encode_checkpoint(model, init_adamw(model), init_ema(model))
    with pytest.raises(FormatError, match="offset 0"):
        decode_checkpoint(b"XXXX" + blob[4:])
    with pytest.raises(FormatError, match="offset 4"):
        decode_checkpoint(blob[:4] + bytes([9]) + blob[5:])
    with pytest.raises(FormatError):
        decode_checkpoint(blob[:-3])
    with pytest.raises(FormatError):
        decode_checkpoint(blob + b"\x00")
