"""Central finite-difference checks used by the kernel, network and training tests."""
from typing import Callable, Iterable

import numpy as np

from .layers import Parameter


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-30) -> float:
    """||a - n|| / (||a|| + ||n||); `floor` keeps truly-zero gradients from comparing round-off noise."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    denom = max(np.linalg.norm(a) + np.linalg.norm(n), floor)
    return float(np.linalg.norm(a - n) / denom)


def numeric_gradient(f: Callable[[], float], x: np.ndarray, eps: float = 1e-6,
                     max_entries: int = 0, rng: np.random.Generator = None) -> np.ndarray:
    """
    d f / d x by central differences, perturbing `x` in place.

    With max_entries > 0 only a random subset of entries is checked; the rest stay NaN.
    """
    grad = np.full(x.shape, np.nan) if max_entries else np.zeros(x.shape)
    flat = x.reshape(-1)
    indices = np.arange(flat.size)
    if max_entries and flat.size > max_entries:
        indices = (rng or np.random.default_rng(0)).choice(flat.size, size=max_entries, replace=False)
    grad_flat = grad.reshape(-1)
    for i in indices:
        original = flat[i]
        flat[i] = original + eps
        plus = f()
        flat[i] = original - eps
        minus = f()
        flat[i] = original
        grad_flat[i] = (plus - minus) / (2 * eps)
    return grad


def check_parameters(loss: Callable[[], float], params: Iterable[tuple], eps: float = 1e-6,
                     max_entries: int = 0, rng: np.random.Generator = None, floor: float = 1e-5) -> dict:
    """Relative error per named parameter, comparing `.grad` against central differences."""
    errors = {}
    for name, param in params:
        if not isinstance(param, Parameter) or not param.trainable:
            continue
        numeric = numeric_gradient(loss, param.data, eps, max_entries, rng)
        analytic = param.grad_or_zeros()
        checked = ~np.isnan(numeric)
        errors[name] = relative_error(analytic[checked], numeric[checked], floor)
    return errors


def randomize(params: Iterable[Parameter], rng: np.random.Generator, scale: float = 0.5):
    """Overwrites trainable parameters with random values so no gradient is trivially zero."""
    for param in params:
        if param.trainable:
            param.data = rng.standard_normal(param.shape).astype(param.data.dtype) * scale
