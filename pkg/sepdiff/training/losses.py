from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..diffusion.schedule import diffuse, velocity
from ..errors import InvalidArgumentError
from ..model import kernels as K
from ..model.network import SeparationModel
from .types import LossReport


def mse(prediction: np.ndarray, target: np.ndarray) -> Tuple[float, np.ndarray]:
    """Mean squared error over all elements and its gradient w.r.t. `prediction`."""
    if prediction.shape != target.shape:
        raise InvalidArgumentError(f"Prediction {prediction.shape} does not match target {target.shape}")
    diff = prediction - target.astype(prediction.dtype)
    return float(np.mean(diff.astype(np.float64) ** 2)), (2.0 / diff.size) * diff


def draw_noise(rng: np.random.Generator, x0: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """One continuous sigma ~ U[0, 1] per batch item and a Gaussian noise tensor."""
    sigma = rng.uniform(0.0, 1.0, size=x0.shape[0])
    eps = rng.standard_normal(x0.shape).astype(x0.dtype)
    return sigma, eps


@dataclass
class _Term:
    loss: float
    grad: np.ndarray  # d loss / d output of the trained path
    cache: Any


def diffusion_loss(model: SeparationModel, x0: np.ndarray, embeddings: Dict[int, np.ndarray],
                   sigma: np.ndarray, eps: np.ndarray) -> _Term:
    """|| generator(x_sigma, sigma, embeddings) - v_sigma ||^2 averaged over every element."""
    x_t = diffuse(x0, eps, sigma).astype(x0.dtype)
    target = velocity(x0, eps, sigma)
    v, cache = model.generator.forward(x_t, sigma, embeddings)
    loss, dv = mse(v, target)
    return _Term(loss, dv, cache)


def aux_latent_loss(model: SeparationModel, latent: np.ndarray, x0: np.ndarray) -> _Term:
    """The latent head should already read as the target, average-pooled to the bottleneck rate."""
    pooled, _ = K.avgpool_forward(x0, model.config.total_downsampling)
    y, cache = model.latent_head.forward(latent)
    loss, dy = mse(y, pooled)
    return _Term(loss, dy, cache)


def aux_reconstruction_loss(model: SeparationModel, reconstruction: np.ndarray, x0: np.ndarray) -> _Term:
    y, cache = model.reconstruction_head.forward(reconstruction)
    loss, dy = mse(y, x0)
    return _Term(loss, dy, cache)


def total_loss(model: SeparationModel, x0: np.ndarray, c: np.ndarray, sigma: np.ndarray, eps: np.ndarray,
               latent_weight: float, reconstruction_weight: float, diffusion_weight: float = 1.0,
               backward: bool = True) -> LossReport:
    """
    l_diff + latent_weight * l_lat + reconstruction_weight * l_rec, accumulating gradients.

    The diffusion term trains the generator and the conditioner; the auxiliary terms reach
    only the conditioner and their own heads. A zero weight skips that term's backward pass
    entirely, so the parameters only it would train get no gradient at all.
    """
    out, cond_cache = model.conditioner.forward(c)
    diff = diffusion_loss(model, x0, out.embeddings, sigma, eps)
    lat = aux_latent_loss(model, out.latent, x0)
    rec = aux_reconstruction_loss(model, out.reconstruction, x0)
    report = LossReport(
        l_diff=diff.loss, l_lat=lat.loss, l_rec=rec.loss,
        total=diffusion_weight * diff.loss + latent_weight * lat.loss + reconstruction_weight * rec.loss)
    if not backward:
        return report

    d_embeddings: Dict[int, np.ndarray] = {}
    if diffusion_weight:
        d_embeddings = model.generator.backward(diffusion_weight * diff.grad, diff.cache)
    d_latent: Optional[np.ndarray] = None
    if latent_weight:
        d_latent = model.latent_head.backward(latent_weight * lat.grad, lat.cache)
    if reconstruction_weight:
        d_reconstruction = model.reconstruction_head.backward(reconstruction_weight * rec.grad, rec.cache)
    else:
        d_reconstruction = np.zeros_like(out.reconstruction)
    if d_embeddings or d_latent is not None or reconstruction_weight:
        model.conditioner.backward(d_embeddings, d_latent, d_reconstruction, cond_cache)
    return report
