# src/modules/nn/nn_service.py
"""Clean-data predictor: MLP forward/backward by hand, AdamW and EMA."""

from typing import List, Optional, Tuple

import numpy as np

from src.common.errors import ContractError, TrainingDivergedError

from .schemas import AdamWState, EmaState, Mlp, MlpGrads

GELU_C = np.sqrt(2.0 / np.pi)


# ============================================================================
# MODEL
# ============================================================================

def time_embedding(t, width: int) -> np.ndarray:
    """Sinusoidal features of t at geometrically spaced frequencies, shape [B, width]."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if width == 0:
        return np.zeros((t.shape[0], 0))
    freqs = np.geomspace(1.0, 1000.0, (width + 1) // 2)
    angles = t[:, None] * freqs[None, :]
    return np.concatenate([np.sin(angles), np.cos(angles)], axis=1)[:, :width]


def init_mlp(frames: int, features: int, hidden: List[int], embedding_width: int = 16, seed: int = 0) -> Mlp:
    """Fan-in scaled uniform initialisation with a fixed seed."""
    rng = np.random.default_rng(seed)
    widths = [frames * features + embedding_width, *hidden, frames * features]
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)).astype(np.float32))
        biases.append(rng.uniform(-bound, bound, size=fan_out).astype(np.float32))
    return Mlp(frames=frames, features=features, embedding_width=embedding_width,
               widths=widths, weights=weights, biases=biases)


def _gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + np.tanh(GELU_C * (x + 0.044715 * x ** 3)))


def _gelu_grad(x: np.ndarray) -> np.ndarray:
    th = np.tanh(GELU_C * (x + 0.044715 * x ** 3))
    return 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * GELU_C * (1.0 + 3 * 0.044715 * x * x)


def _network_input(model: Mlp, xt: np.ndarray, t) -> Tuple[np.ndarray, bool]:
    x = np.asarray(xt)
    if x.shape[-2:] != (model.frames, model.features) or x.ndim not in (2, 3):
        raise ContractError(f"expected [..., {model.frames}, {model.features}], got {x.shape}")
    single = x.ndim == 2
    if single:
        x = x[None]
    dtype = model.weights[0].dtype
    batch = x.shape[0]
    t = np.broadcast_to(np.asarray(t, dtype=np.float64), (batch,))
    emb = time_embedding(t, model.embedding_width)
    return np.concatenate([x.reshape(batch, -1), emb], axis=1).astype(dtype), single


def _forward_cached(model: Mlp, inputs: np.ndarray):
    layer_inputs, pre_acts = [], []
    h = inputs
    last = len(model.weights) - 1
    for index, (weight, bias) in enumerate(zip(model.weights, model.biases)):
        layer_inputs.append(h)
        pre = h @ weight + bias
        pre_acts.append(pre)
        h = pre if index == last else _gelu(pre)
    return h, layer_inputs, pre_acts


def forward(model: Mlp, xt: np.ndarray, t) -> np.ndarray:
    """Predict X0 from X_t at time t; [N, D] or [B, N, D] in, same shape out."""
    inputs, single = _network_input(model, xt, t)
    out, _, _ = _forward_cached(model, inputs)
    out = out.reshape(-1, model.frames, model.features)
    return out[0] if single else out


def backward(
    model: Mlp,
    xt: np.ndarray,
    t,
    target: np.ndarray,
    mask: Optional[np.ndarray] = None,
) -> Tuple[float, MlpGrads]:
    """
    Mean squared error against `target` and its parameter gradients.

    Args:
        model: Network.
        xt: Noisy inputs, [N, D] or [B, N, D].
        t: Times, scalar or one per batch element.
        target: Clean sequences, same shape as xt.
        mask: Optional 0/1 weights broadcastable to xt; the mean runs over
            the selected entries only.

    Returns:
        (loss, gradients)
    """
    inputs, _ = _network_input(model, xt, t)
    out, layer_inputs, pre_acts = _forward_cached(model, inputs)
    target = np.asarray(target).reshape(out.shape).astype(out.dtype)
    if mask is None:
        weight_map = np.ones_like(out)
    else:
        weight_map = np.broadcast_to(np.asarray(mask, dtype=out.dtype),
                                     (out.shape[0], model.frames, model.features)).reshape(out.shape)
    count = float(weight_map.sum())
    residual = (out - target) * weight_map
    loss = float(np.sum(residual.astype(np.float64) ** 2) / count)
    if not np.isfinite(loss):
        raise TrainingDivergedError()

    grad = (2.0 / count) * residual
    grad_weights: List[np.ndarray] = [None] * len(model.weights)
    grad_biases: List[np.ndarray] = [None] * len(model.biases)
    for index in range(len(model.weights) - 1, -1, -1):
        grad_weights[index] = layer_inputs[index].T @ grad
        grad_biases[index] = grad.sum(axis=0)
        if index > 0:
            grad = (grad @ model.weights[index].T) * _gelu_grad(pre_acts[index - 1])
    return loss, MlpGrads(weights=grad_weights, biases=grad_biases)


def numerical_gradients(
    model: Mlp,
    xt: np.ndarray,
    t,
    target: np.ndarray,
    delta: float = 1e-3,
    mask: Optional[np.ndarray] = None,
) -> List[np.ndarray]:
    """Central finite differences of the loss in 64-bit, per parameter array."""
    replay = model.astype(np.float64)
    out = []
    for param in replay.params:
        grad = np.zeros_like(param)
        for index in np.ndindex(param.shape):
            saved = param[index]
            param[index] = saved + delta
            up, _ = backward(replay, xt, t, target, mask)
            param[index] = saved - delta
            down, _ = backward(replay, xt, t, target, mask)
            param[index] = saved
            grad[index] = (up - down) / (2.0 * delta)
        out.append(grad)
    return out


# ============================================================================
# OPTIMISATION
# ============================================================================

def init_adamw(model: Mlp, lr: float = 3e-5, betas=(0.9, 0.95), weight_decay: float = 1e-4) -> AdamWState:
    return AdamWState(
        lr=lr, betas=tuple(betas), weight_decay=weight_decay,
        exp_avg=[np.zeros_like(p) for p in model.params],
        exp_avg_sq=[np.zeros_like(p) for p in model.params],
    )


def adamw_step(state: AdamWState, model: Mlp, grads: MlpGrads) -> Tuple[Mlp, AdamWState]:
    """One AdamW update, in place on the model's arrays."""
    beta1, beta2 = state.betas
    state.step += 1
    bias_correction1 = 1.0 - beta1 ** state.step
    bias_correction2 = 1.0 - beta2 ** state.step
    for param, grad, exp_avg, exp_avg_sq in zip(model.params, grads.params, state.exp_avg, state.exp_avg_sq):
        if state.weight_decay:
            param *= 1.0 - state.lr * state.weight_decay
        exp_avg *= beta1
        exp_avg += (1.0 - beta1) * grad
        exp_avg_sq *= beta2
        exp_avg_sq += (1.0 - beta2) * grad * grad
        denom = np.sqrt(exp_avg_sq / bias_correction2) + state.eps
        param -= (state.lr / bias_correction1) * exp_avg / denom
        if not np.all(np.isfinite(param)):
            raise TrainingDivergedError("non-finite weights after optimizer step")
    return model, state


def init_ema(model: Mlp, rate: float = 0.999) -> EmaState:
    return EmaState(rate=rate, shadow=[p.copy() for p in model.params])


def ema_update(ema: EmaState, model: Mlp) -> EmaState:
    """shadow <- rate * shadow + (1 - rate) * weights."""
    for shadow, param in zip(ema.shadow, model.params):
        shadow *= ema.rate
        shadow += (1.0 - ema.rate) * param
    return ema


def ema_model(model: Mlp, ema: EmaState) -> Mlp:
    """A copy of the model carrying the EMA weights."""
    shadow = [p.copy() for p in ema.shadow]
    return Mlp(frames=model.frames, features=model.features, embedding_width=model.embedding_width,
               widths=list(model.widths), weights=shadow[0::2], biases=shadow[1::2])
