"""
Tensor kernels with hand-derived gradients.

Activations are (batch, channels, time) unless noted; token kernels work on
(batch, time, channels). Every `*_forward` returns (output, cache) and the matching
`*_backward(dy, cache)` returns the gradients in argument order. Arithmetic follows the
input dtype, so float64 inputs give the gradient-check mode.
"""
from typing import Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import special

from ..errors import InvalidArgumentError

ATTENTION_BLOCK = 1024
NORM_EPS = 1e-5


def _same_padding(kernel: int) -> Tuple[int, int]:
    left = (kernel - 1) // 2
    return left, kernel - 1 - left


# --- convolution -------------------------------------------------------------

def conv1d_forward(x: np.ndarray, w: np.ndarray, b: Optional[np.ndarray], stride: int = 1,
                   padding: Optional[Tuple[int, int]] = None):
    """Cross-correlation via im2col; "same" padding at stride 1, none when strided."""
    if x.ndim != 3 or w.ndim != 3 or x.shape[1] != w.shape[1]:
        raise InvalidArgumentError(f"conv1d: input {x.shape} incompatible with weight {w.shape}")
    kernel = w.shape[2]
    if padding is None:
        padding = _same_padding(kernel) if stride == 1 else (0, 0)
    xp = np.pad(x, ((0, 0), (0, 0), padding)) if any(padding) else x
    if xp.shape[2] < kernel:
        raise InvalidArgumentError(f"conv1d: input length {x.shape[2]} shorter than kernel {kernel}")

    windows = sliding_window_view(xp, kernel, axis=2)[:, :, ::stride, :]
    y = np.tensordot(windows, w, axes=([1, 3], [1, 2])).transpose(0, 2, 1)
    if b is not None:
        y = y + b[None, :, None]
    return np.ascontiguousarray(y), (xp, w, stride, padding, x.shape)


def conv1d_backward(dy: np.ndarray, cache):
    xp, w, stride, padding, x_shape = cache
    kernel = w.shape[2]
    t_out = dy.shape[2]
    windows = sliding_window_view(xp, kernel, axis=2)[:, :, ::stride, :]

    dw = np.tensordot(dy, windows, axes=([0, 2], [0, 2]))
    db = dy.sum(axis=(0, 2))
    dxp = np.zeros_like(xp)
    span = stride * (t_out - 1) + 1
    for k in range(kernel):
        dxp[:, :, k:k + span:stride] += np.einsum("oc,bot->bct", w[:, :, k], dy)
    dx = dxp[:, :, padding[0]:padding[0] + x_shape[2]]
    return dx, dw, db


def conv_transpose1d_forward(x: np.ndarray, w: np.ndarray, b: Optional[np.ndarray], stride: int):
    """
    Transposed convolution with kernel 2*stride; output cropped to exactly stride * T.

    Weight layout is (in_channels, out_channels, kernel).
    """
    if x.ndim != 3 or w.ndim != 3 or x.shape[1] != w.shape[0]:
        raise InvalidArgumentError(f"conv_transpose1d: input {x.shape} incompatible with weight {w.shape}")
    batch, _, t_in = x.shape
    kernel = w.shape[2]
    full_len = (t_in - 1) * stride + kernel
    crop_left = (kernel - stride) // 2
    out_len = t_in * stride

    z = np.tensordot(x, w, axes=([1], [0]))  # (B, T, Cout, K)
    y_full = np.zeros((batch, w.shape[1], full_len), dtype=z.dtype)
    span = stride * (t_in - 1) + 1
    for k in range(kernel):
        y_full[:, :, k:k + span:stride] += z[:, :, :, k].transpose(0, 2, 1)
    y = y_full[:, :, crop_left:crop_left + out_len]
    if b is not None:
        y = y + b[None, :, None]
    return np.ascontiguousarray(y), (x, w, stride, crop_left, full_len)


def conv_transpose1d_backward(dy: np.ndarray, cache):
    x, w, stride, crop_left, full_len = cache
    kernel = w.shape[2]
    dy_full = np.zeros((dy.shape[0], dy.shape[1], full_len), dtype=dy.dtype)
    dy_full[:, :, crop_left:crop_left + dy.shape[2]] = dy
    windows = sliding_window_view(dy_full, kernel, axis=2)[:, :, ::stride, :]  # (B, Cout, T, K)

    dx = np.tensordot(windows, w, axes=([1, 3], [1, 2])).transpose(0, 2, 1)
    dw = np.tensordot(x, windows, axes=([0, 2], [0, 2]))
    db = dy.sum(axis=(0, 2))
    return np.ascontiguousarray(dx), dw, db


# --- normalization -----------------------------------------------------------

def group_count(channels: int) -> int:
    return min(8, channels)


def groupnorm_forward(x: np.ndarray, gamma: np.ndarray, beta: np.ndarray, groups: int, eps: float = NORM_EPS):
    batch, channels, length = x.shape
    if groups < 1 or channels % groups:
        raise InvalidArgumentError(f"groupnorm: {groups} groups do not divide {channels} channels")
    xg = x.reshape(batch, groups, -1)
    mean = xg.mean(axis=2, keepdims=True)
    var = xg.var(axis=2, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = ((xg - mean) * inv_std).reshape(x.shape)
    y = xhat * gamma[None, :, None] + beta[None, :, None]
    return y, (xhat, inv_std, gamma, groups)


def groupnorm_backward(dy: np.ndarray, cache):
    xhat, inv_std, gamma, groups = cache
    batch = dy.shape[0]
    dgamma = np.sum(dy * xhat, axis=(0, 2))
    dbeta = dy.sum(axis=(0, 2))
    dxhat = (dy * gamma[None, :, None]).reshape(batch, groups, -1)
    xh = xhat.reshape(batch, groups, -1)
    n = xh.shape[2]
    dx = (inv_std / n) * (n * dxhat - dxhat.sum(axis=2, keepdims=True)
                          - xh * np.sum(dxhat * xh, axis=2, keepdims=True))
    return dx.reshape(dy.shape), dgamma, dbeta


def layernorm_forward(x: np.ndarray, gamma: np.ndarray, beta: np.ndarray, eps: float = NORM_EPS):
    """Normalizes the last axis (tokens are (batch, time, channels))."""
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x - mean) * inv_std
    return xhat * gamma + beta, (xhat, inv_std, gamma)


def layernorm_backward(dy: np.ndarray, cache):
    xhat, inv_std, gamma = cache
    reduce_axes = tuple(range(dy.ndim - 1))
    dgamma = np.sum(dy * xhat, axis=reduce_axes)
    dbeta = dy.sum(axis=reduce_axes)
    dxhat = dy * gamma
    n = dy.shape[-1]
    dx = (inv_std / n) * (n * dxhat - dxhat.sum(axis=-1, keepdims=True)
                          - xhat * np.sum(dxhat * xhat, axis=-1, keepdims=True))
    return dx, dgamma, dbeta


# --- activations -------------------------------------------------------------

def silu_forward(x: np.ndarray):
    s = special.expit(x)
    return x * s, (x, s)


def silu_backward(dy: np.ndarray, cache):
    x, s = cache
    return dy * (s * (1.0 + x * (1.0 - s)))


def gelu_forward(x: np.ndarray):
    """Exact GELU, x * Phi(x)."""
    cdf = 0.5 * (1.0 + special.erf(x / np.sqrt(2.0)))
    return x * cdf, (x, cdf)


def gelu_backward(dy: np.ndarray, cache):
    x, cdf = cache
    pdf = np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)
    return dy * (cdf + x * pdf)


def relu_forward(x: np.ndarray):
    mask = x > 0
    return x * mask, mask


def relu_backward(dy: np.ndarray, cache):
    return dy * cache


def prelu_forward(x: np.ndarray, slope: np.ndarray):
    """Single learned negative slope shared by all channels."""
    positive = x > 0
    return np.where(positive, x, slope[0] * x), (x, positive, slope)


def prelu_backward(dy: np.ndarray, cache):
    x, positive, slope = cache
    dx = np.where(positive, dy, slope[0] * dy)
    dslope = np.array([np.sum(np.where(positive, 0.0, dy * x))], dtype=slope.dtype)
    return dx, dslope


# --- dense ----------------------------------------------------------------------

def linear_forward(x: np.ndarray, w: np.ndarray, b: Optional[np.ndarray]):
    """y = x @ w.T + b over the last axis; w is (out, in)."""
    if x.shape[-1] != w.shape[1]:
        raise InvalidArgumentError(f"linear: input features {x.shape[-1]} != weight input {w.shape[1]}")
    y = x @ w.T
    if b is not None:
        y = y + b
    return y, (x, w)


def linear_backward(dy: np.ndarray, cache):
    x, w = cache
    dx = dy @ w
    flat_x = x.reshape(-1, x.shape[-1])
    flat_dy = dy.reshape(-1, dy.shape[-1])
    return dx, flat_dy.T @ flat_x, flat_dy.sum(axis=0)


def film_forward(x: np.ndarray, scale: np.ndarray, shift: np.ndarray):
    """Per-channel scale * x + shift; scale and shift are (batch, channels)."""
    return x * scale[:, :, None] + shift[:, :, None], (x, scale)


def film_backward(dy: np.ndarray, cache):
    x, scale = cache
    return dy * scale[:, :, None], np.sum(dy * x, axis=2), dy.sum(axis=2)


def avgpool_forward(x: np.ndarray, factor: int):
    batch, channels, length = x.shape
    if length % factor:
        raise InvalidArgumentError(f"avgpool: length {length} not divisible by {factor}")
    return x.reshape(batch, channels, length // factor, factor).mean(axis=3), factor


def avgpool_backward(dy: np.ndarray, cache):
    factor = cache
    return np.repeat(dy, factor, axis=2) / factor


# --- attention -----------------------------------------------------------------

def rotary_angles(length: int, head_dim: int, dtype=np.float64, base: float = 10000.0):
    if head_dim % 2:
        raise InvalidArgumentError(f"rotary: head dimension {head_dim} must be even")
    inv_freq = base ** (-np.arange(0, head_dim, 2, dtype=np.float64) / head_dim)
    angles = np.arange(length, dtype=np.float64)[:, None] * inv_freq[None, :]
    return np.cos(angles).astype(dtype), np.sin(angles).astype(dtype)


def _rotate(x: np.ndarray, cos: np.ndarray, sin: np.ndarray) -> np.ndarray:
    even, odd = x[..., 0::2], x[..., 1::2]
    out = np.empty_like(x)
    out[..., 0::2] = even * cos - odd * sin
    out[..., 1::2] = even * sin + odd * cos
    return out


def rotary_forward(x: np.ndarray):
    """Rotates interleaved channel pairs of (batch, heads, time, head_dim) by position."""
    cos, sin = rotary_angles(x.shape[2], x.shape[3], x.dtype)
    return _rotate(x, cos, sin), (cos, sin)


def rotary_backward(dy: np.ndarray, cache):
    cos, sin = cache
    return _rotate(dy, cos, -sin)


def attention_forward(q: np.ndarray, k: np.ndarray, v: np.ndarray, block: int = ATTENTION_BLOCK):
    """
    Softmax attention on (batch, heads, time, head_dim), processed in query blocks.

    Only the output and per-row log-sum-exp are kept; the backward pass recomputes
    the probabilities block by block.
    """
    scale = 1.0 / np.sqrt(q.shape[-1])
    length = q.shape[2]
    out = np.empty_like(q)
    lse = np.empty(q.shape[:3], dtype=q.dtype)
    k_t = np.swapaxes(k, -1, -2)
    for start in range(0, length, block):
        stop = min(start + block, length)
        scores = (q[:, :, start:stop] @ k_t) * scale
        peak = scores.max(axis=-1, keepdims=True)
        probs = np.exp(scores - peak)
        total = probs.sum(axis=-1, keepdims=True)
        out[:, :, start:stop] = (probs @ v) / total
        lse[:, :, start:stop] = (peak + np.log(total))[..., 0]
    return out, (q, k, v, out, lse, scale, block)


def attention_backward(dout: np.ndarray, cache):
    q, k, v, out, lse, scale, block = cache
    dq = np.empty_like(q)
    dk = np.zeros_like(k)
    dv = np.zeros_like(v)
    k_t = np.swapaxes(k, -1, -2)
    v_t = np.swapaxes(v, -1, -2)
    delta = np.sum(dout * out, axis=-1, keepdims=True)
    for start in range(0, q.shape[2], block):
        stop = min(start + block, q.shape[2])
        probs = np.exp((q[:, :, start:stop] @ k_t) * scale - lse[:, :, start:stop, None])
        d_blk = dout[:, :, start:stop]
        dv += np.swapaxes(probs, -1, -2) @ d_blk
        dscores = probs * (d_blk @ v_t - delta[:, :, start:stop]) * scale
        dq[:, :, start:stop] = dscores @ k
        dk += np.swapaxes(dscores, -1, -2) @ q[:, :, start:stop]
    return dq, dk, dv
