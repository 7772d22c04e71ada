import numpy as np

from .layers import Activation, Linear, Module, ParamFactory, Sequential

FOURIER_SCALE = 16.0


class StepEmbedding(Module):
    """
    Random Fourier features of the noise level followed by a 3-layer GELU MLP.

    The frequency vector is drawn once at init, frozen, and saved with the weights.
    """

    def __init__(self, init: ParamFactory, fourier_channels: int, embed_channels: int):
        super().__init__()
        self.frequencies = init.normal((fourier_channels // 2,), FOURIER_SCALE, trainable=False)
        self.mlp = Sequential([
            Linear(init, fourier_channels, embed_channels), Activation("gelu"),
            Linear(init, embed_channels, embed_channels), Activation("gelu"),
            Linear(init, embed_channels, embed_channels),
        ])

    def features(self, sigma: np.ndarray) -> np.ndarray:
        freqs = self.frequencies.data
        angles = 2.0 * np.pi * np.asarray(sigma, dtype=freqs.dtype).reshape(-1, 1) * freqs[None, :]
        return np.concatenate([np.sin(angles), np.cos(angles)], axis=1)

    def forward(self, sigma):
        return self.mlp.forward(self.features(sigma))

    def backward(self, demb, cache):
        self.mlp.backward(demb, cache)
        return None
