from typing import Any, Optional, Union

import numpy as np

from ..diffusion.schedule import alpha_beta
from ..errors import InvalidArgumentError

ArrayLike = Union[float, np.ndarray]


def oracle_x0(x_t: np.ndarray, sigma: float, mean: ArrayLike, std: float) -> np.ndarray:
    """Posterior mean E[x0 | x_t] for x0 ~ N(mean, std^2 I)."""
    alpha, beta = (float(c) for c in alpha_beta(sigma))
    x = np.asarray(x_t, dtype=np.float64)
    mu = np.asarray(mean, dtype=np.float64)
    if beta == 0.0:
        return x
    gain = alpha * std * std / (alpha * alpha * std * std + beta * beta)
    return mu + gain * (x - alpha * mu)


def oracle_predict_v(x_t: np.ndarray, sigma: float, mean: ArrayLike, std: float) -> np.ndarray:
    """Exact MMSE velocity for Gaussian data; at sigma = 0 it is consistent with x0 = x_t."""
    if std < 0:
        raise InvalidArgumentError(f"std must be >= 0, got {std}")
    x = np.asarray(x_t)
    out_dtype = np.result_type(np.float32, x.dtype)
    alpha, beta = (float(c) for c in alpha_beta(sigma))
    if beta == 0.0:
        return np.zeros(x.shape, dtype=out_dtype)

    x0 = oracle_x0(x, sigma, mean, std)
    eps = (x.astype(np.float64) - alpha * x0) / beta
    return (alpha * eps - beta * x0).astype(out_dtype)


class GaussianOracleDenoiser:
    """Closed-form denoiser for x0 ~ N(mean, std^2); ignores the conditioning mixture."""
    channel_count: Optional[int] = None
    sample_rate: Optional[int] = None

    def __init__(self, mean: ArrayLike, std: float):
        if std < 0:
            raise InvalidArgumentError(f"std must be >= 0, got {std}")
        self.mean = mean
        self.std = float(std)

    def prepare(self, condition: np.ndarray) -> Any:
        return None

    def predict_v(self, x_t: np.ndarray, sigma: float, prepared: Any) -> np.ndarray:
        return oracle_predict_v(x_t, sigma, self.mean, self.std)
