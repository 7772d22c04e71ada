from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from ..errors import NumericFailureError
from .layers import (Activation, AttentionBlock, AvgPool, Conv1d, ConvTranspose1d, GroupNorm, Module,
                     ModuleList, ParamFactory, PReLU, Sequential, TransformerLayer)
from .types import ModelConfig


@dataclass
class ConditionerOutput:
    embeddings: Dict[int, np.ndarray]  # decoder block outputs at the conditioning levels
    latent: np.ndarray  # bottleneck after the transformer
    reconstruction: np.ndarray  # full-resolution decoder features


class ConditionerBlock(Module):
    """Three GroupNorm/PReLU/conv layers with a residual, optional time-wise attention."""

    def __init__(self, init: ParamFactory, channels: int, heads: Optional[int] = None):
        super().__init__()
        layers = []
        for _ in range(3):
            layers += [GroupNorm(init, channels), PReLU(init), Conv1d(init, channels, channels, 3)]
        self.layers = Sequential(layers)
        self.attention = AttentionBlock(init, channels, heads) if heads else None

    def forward(self, x):
        h, layer_cache = self.layers.forward(x)
        y = x + h
        attn_cache = None
        if self.attention is not None:
            y, attn_cache = self.attention.forward(y)
        return y, (layer_cache, attn_cache)

    def backward(self, dy, cache):
        layer_cache, attn_cache = cache
        if self.attention is not None:
            dy = self.attention.backward(dy, attn_cache)
        return dy + self.layers.backward(dy, layer_cache)


class ConditionerEncoderLevel(Module):
    """Down conv, one block, and the auxiliary connection into the bottleneck."""

    def __init__(self, init: ParamFactory, config: ModelConfig, level: int, in_channels: int):
        super().__init__()
        channels = config.conditioner_channels()[level]
        factor = config.down_factors[level]
        heads = (config.attention_heads
                 if config.conditioner_attention and level in config.attention_levels else None)
        pool = int(np.prod(config.down_factors[level + 1:]))
        self.down = Conv1d(init, in_channels, channels, factor, stride=factor) if factor > 1 else None
        self.block = ConditionerBlock(init, channels, heads)
        self.aux = Sequential([GroupNorm(init, channels), Activation("relu"),
                               Conv1d(init, channels, config.bottleneck_channels, 1), AvgPool(pool)])

    def forward(self, h):
        down_cache = None
        if self.down is not None:
            h, down_cache = self.down.forward(h)
        h, block_cache = self.block.forward(h)
        a, aux_cache = self.aux.forward(h)
        return h, a, (down_cache, block_cache, aux_cache)

    def backward(self, dh, daux, cache):
        down_cache, block_cache, aux_cache = cache
        dh = self.block.backward(dh + self.aux.backward(daux, aux_cache), block_cache)
        if self.down is not None:
            dh = self.down.backward(dh, down_cache)
        return dh


class ConditionerDecoderLevel(Module):
    def __init__(self, init: ParamFactory, config: ModelConfig, level: int, out_channels: int):
        super().__init__()
        channels = config.conditioner_channels()[level]
        factor = config.down_factors[level]
        heads = (config.attention_heads
                 if config.conditioner_attention and level in config.attention_levels else None)
        self.block = ConditionerBlock(init, channels, heads)
        self.up = ConvTranspose1d(init, channels, out_channels, factor) if factor > 1 else None

    def forward(self, h):
        b, block_cache = self.block.forward(h)
        up_cache = None
        out = b
        if self.up is not None:
            out, up_cache = self.up.forward(b)
        return out, b, (block_cache, up_cache)

    def backward(self, dout, dblock_extra, cache):
        block_cache, up_cache = cache
        db = self.up.backward(dout, up_cache) if self.up is not None else dout
        if dblock_extra is not None:
            db = db + dblock_extra
        return self.block.backward(db, block_cache)


class Conditioner(Module):
    """
    Encoder/decoder over the mixture without U-Net skips.

    Every encoder block feeds the bottleneck through an auxiliary 1x1 path; the bottleneck
    optionally runs a rotary transformer; decoder block outputs at the conditioning levels
    become the multi-resolution embeddings.
    """

    def __init__(self, config: ModelConfig, init: ParamFactory):
        super().__init__()
        self.config = config
        channels = config.conditioner_channels()
        base = config.conditioner_base_channels
        self.stem = Conv1d(init, config.channel_count, base, 3)
        self.encoder = ModuleList(ConditionerEncoderLevel(init, config, i, channels[i - 1] if i else base)
                                  for i in range(config.levels))
        self.transformer = ModuleList(TransformerLayer(init, config.bottleneck_channels, config.attention_heads)
                                      for _ in range(config.bottleneck_transformer_layers))
        self.decoder = ModuleList(ConditionerDecoderLevel(init, config, i, channels[i - 1] if i else base)
                                  for i in range(config.levels))

    def forward(self, c):
        h, stem_cache = self.stem.forward(c)
        bottleneck = None
        enc_caches = []
        for level in self.encoder:
            h, a, cache = level.forward(h)
            enc_caches.append(cache)
            bottleneck = a if bottleneck is None else bottleneck + a
        z = h + bottleneck

        tokens = z.transpose(0, 2, 1)
        tf_caches = []
        for layer in self.transformer:
            tokens, cache = layer.forward(tokens)
            tf_caches.append(cache)
        latent = np.ascontiguousarray(tokens.transpose(0, 2, 1))

        embeddings = {}
        dec_caches = {}
        h = latent
        for i in reversed(range(self.config.levels)):
            h, block_out, dec_caches[i] = self.decoder[i].forward(h)
            if i in self.config.conditioning_levels:
                embeddings[i] = block_out

        out = ConditionerOutput(embeddings=embeddings, latent=latent, reconstruction=h)
        checks = [("latent", latent), ("reconstruction", h)]
        checks += [(f"embedding {i}", e) for i, e in embeddings.items()]
        for name, value in checks:
            if not np.all(np.isfinite(value)):
                raise NumericFailureError(f"Conditioner produced non-finite {name}")
        return out, (stem_cache, enc_caches, tf_caches, dec_caches)

    def backward(self, d_embeddings: Dict[int, np.ndarray], d_latent: Optional[np.ndarray],
                 d_reconstruction: np.ndarray, cache):
        stem_cache, enc_caches, tf_caches, dec_caches = cache
        dh = d_reconstruction
        for i in range(self.config.levels):
            dh = self.decoder[i].backward(dh, d_embeddings.get(i), dec_caches[i])
        if d_latent is not None:
            dh = dh + d_latent

        dtokens = dh.transpose(0, 2, 1)
        for layer, cache in zip(reversed(list(self.transformer)), reversed(tf_caches)):
            dtokens = layer.backward(dtokens, cache)
        dz = np.ascontiguousarray(dtokens.transpose(0, 2, 1))

        dh = dz
        for i in reversed(range(self.config.levels)):
            dh = self.encoder[i].backward(dh, dz, enc_caches[i])
        self.stem.backward(dh, stem_cache)

    def __call__(self, c):
        return self.forward(c)[0]
