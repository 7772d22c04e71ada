from typing import Tuple, Union

import numpy as np

from ..audio import AudioBuffer
from ..errors import InvalidArgumentError
from .types import DiffusionCoeffs, NoiseSchedule, Spacing

SigmaLike = Union[float, np.ndarray]


def make_schedule(steps: int, spacing: Spacing = Spacing.LINEAR) -> NoiseSchedule:
    if steps < 1:
        raise InvalidArgumentError(f"Schedule needs at least one step, got T={steps}")
    if spacing != Spacing.LINEAR:
        raise InvalidArgumentError(f"Unsupported schedule spacing: {spacing}")
    sigmas = tuple(float(t) / steps for t in range(steps + 1))
    return NoiseSchedule(sigmas=sigmas, spacing=spacing)


def _check_sigma(sigma: SigmaLike):
    s = np.asarray(sigma, dtype=np.float64)
    if np.any(~np.isfinite(s)) or np.any(s < 0.0) or np.any(s > 1.0):
        raise InvalidArgumentError(f"Noise level must lie in [0, 1], got {sigma}")
    return s


def alpha_beta(sigma: SigmaLike) -> Tuple[np.ndarray, np.ndarray]:
    """(cos(pi*sigma/2), sin(pi*sigma/2)) in float64, exact at the endpoints."""
    s = _check_sigma(sigma)
    phi = 0.5 * np.pi * s
    alpha = np.where(s == 1.0, 0.0, np.cos(phi))
    beta = np.where(s == 0.0, 0.0, np.sin(phi))
    return alpha, beta


def coeffs(sigma: float) -> DiffusionCoeffs:
    alpha, beta = alpha_beta(sigma)
    return DiffusionCoeffs(alpha=float(alpha), beta=float(beta), phi=0.5 * np.pi * float(sigma))


def _out_dtype(*arrays: np.ndarray):
    return np.result_type(np.float32, *(a.dtype for a in arrays))


def _broadcast_sigma(alpha: np.ndarray, ndim: int) -> np.ndarray:
    # per-item sigmas of shape (B,) scale a (B, C, D) batch
    if alpha.ndim == 0:
        return alpha
    return alpha.reshape(alpha.shape + (1,) * (ndim - alpha.ndim))


def _combine(a: np.ndarray, b: np.ndarray, ca: np.ndarray, cb: np.ndarray) -> np.ndarray:
    if a.shape != b.shape:
        raise InvalidArgumentError(f"Shape mismatch: {a.shape} vs {b.shape}")
    ca = _broadcast_sigma(ca, a.ndim)
    cb = _broadcast_sigma(cb, a.ndim)
    out = ca * a.astype(np.float64) + cb * b.astype(np.float64)
    return out.astype(_out_dtype(a, b))


def diffuse(x0: np.ndarray, eps: np.ndarray, sigma: SigmaLike) -> np.ndarray:
    """x_t = alpha*x0 + beta*eps"""
    alpha, beta = alpha_beta(sigma)
    return _combine(x0, eps, alpha, beta)


def velocity(x0: np.ndarray, eps: np.ndarray, sigma: SigmaLike) -> np.ndarray:
    """v = alpha*eps - beta*x0"""
    alpha, beta = alpha_beta(sigma)
    return _combine(eps, x0, alpha, -beta)


def x0_from_v(x_t: np.ndarray, v: np.ndarray, sigma: SigmaLike) -> np.ndarray:
    """x0 = alpha*x_t - beta*v"""
    alpha, beta = alpha_beta(sigma)
    return _combine(x_t, v, alpha, -beta)


def eps_from_v(x_t: np.ndarray, v: np.ndarray, sigma: SigmaLike) -> np.ndarray:
    """eps = beta*x_t + alpha*v"""
    alpha, beta = alpha_beta(sigma)
    return _combine(x_t, v, beta, alpha)


def _buffers(a: AudioBuffer, b: AudioBuffer, what: str):
    a.check_compatible(b, what)
    return a.samples, b.samples


def forward_diffuse(x0: AudioBuffer, eps: AudioBuffer, sigma: float) -> AudioBuffer:
    return x0.with_samples(diffuse(*_buffers(x0, eps, "x0 and eps"), sigma))


def velocity_target(x0: AudioBuffer, eps: AudioBuffer, sigma: float) -> AudioBuffer:
    return x0.with_samples(velocity(*_buffers(x0, eps, "x0 and eps"), sigma))


def recover_x0(x_t: AudioBuffer, v: AudioBuffer, sigma: float) -> AudioBuffer:
    return x_t.with_samples(x0_from_v(*_buffers(x_t, v, "x_t and v"), sigma))


def recover_eps(x_t: AudioBuffer, v: AudioBuffer, sigma: float) -> AudioBuffer:
    return x_t.with_samples(eps_from_v(*_buffers(x_t, v, "x_t and v"), sigma))
