from typing import Any

import numpy as np

from ..errors import InvalidArgumentError
from ..streams import SubStream, make_rng
from .conditioner import Conditioner, ConditionerOutput
from .generator import Generator
from .layers import Conv1d, Module, ParamFactory
from .types import ModelConfig, ParameterReport


class SeparationModel(Module):
    """
    Conditioner + generator pair with the two auxiliary 1x1 heads.

    Also implements the sampler's denoiser contract: `prepare` runs the conditioner once
    per mixture, `predict_v` runs the generator. Inference never mutates parameters.
    """

    def __init__(self, config: ModelConfig, seed: int = 0, dtype=np.float32, shape_only: bool = False):
        super().__init__()
        rng = None if shape_only else make_rng(seed, SubStream.INIT)
        init = ParamFactory(rng, dtype, shape_only)
        self.config = config
        self.conditioner = Conditioner(config, init)
        self.generator = Generator(config, init)
        self.latent_head = Conv1d(init, config.bottleneck_channels, config.channel_count, 1)
        self.reconstruction_head = Conv1d(init, config.conditioner_base_channels, config.channel_count, 1)

    @property
    def channel_count(self) -> int:
        return self.config.channel_count

    @property
    def sample_rate(self) -> int:
        return self.config.sample_rate

    @property
    def dtype(self):
        return self.generator.stem.weight.data.dtype

    def _batched(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim == 2:
            x = x[None]
        if x.ndim != 3 or x.shape[1] != self.channel_count:
            raise InvalidArgumentError(
                f"Expected (batch, {self.channel_count}, time) input, got shape {x.shape}")
        self.config.level_lengths(x.shape[2])
        return x

    def prepare(self, condition: np.ndarray) -> ConditionerOutput:
        return self.conditioner(self._batched(condition))

    def predict_v(self, x_t: np.ndarray, sigma: float, prepared: Any) -> np.ndarray:
        squeeze = np.asarray(x_t).ndim == 2
        x = self._batched(x_t)
        sigmas = np.full(x.shape[0], sigma, dtype=np.float64)
        v = self.generator(x, sigmas, prepared.embeddings)
        return v[0] if squeeze else v


def parameter_count(config: ModelConfig) -> ParameterReport:
    """Counts parameters without allocating them."""
    model = SeparationModel(config, shape_only=True)
    frozen = sum(p.size for p in model.parameters() if not p.trainable)
    return ParameterReport(
        conditioner=model.conditioner.parameter_count(),
        generator=model.generator.parameter_count(),
        heads=model.latent_head.parameter_count() + model.reconstruction_head.parameter_count(),
        frozen=frozen,
    )

