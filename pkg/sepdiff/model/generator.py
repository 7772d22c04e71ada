from typing import Dict, Optional

import numpy as np

from ..errors import NumericFailureError
from .embedding import StepEmbedding
from .layers import (Activation, AttentionBlock, Conv1d, ConvTranspose1d, FiLM, GroupNorm, Module,
                     ModuleList, ParamFactory, Sequential)
from .types import ModelConfig


class ResBlock(Module):
    """Two GroupNorm/SiLU/conv layers, FiLM from the step embedding, residual, optional attention."""

    def __init__(self, init: ParamFactory, channels: int, embed_channels: int, heads: Optional[int] = None):
        super().__init__()
        self.convs = Sequential([
            GroupNorm(init, channels), Activation("silu"), Conv1d(init, channels, channels, 3),
            GroupNorm(init, channels), Activation("silu"), Conv1d(init, channels, channels, 3),
        ])
        self.film = FiLM(init, embed_channels, channels)
        self.attention = AttentionBlock(init, channels, heads) if heads else None

    def forward(self, x, emb):
        h, conv_cache = self.convs.forward(x)
        h, film_cache = self.film.forward(h, emb)
        y = x + h
        attn_cache = None
        if self.attention is not None:
            y, attn_cache = self.attention.forward(y)
        return y, (conv_cache, film_cache, attn_cache)

    def backward(self, dy, cache):
        conv_cache, film_cache, attn_cache = cache
        if self.attention is not None:
            dy = self.attention.backward(dy, attn_cache)
        dh, demb = self.film.backward(dy, film_cache)
        return dy + self.convs.backward(dh, conv_cache), demb

    def __call__(self, x, emb):
        return self.forward(x, emb)[0]


class Injection(Module):
    """Concatenates a channel-matched conditioning embedding and merges with a 1x1 conv."""

    def __init__(self, init: ParamFactory, cond_channels: int, channels: int):
        super().__init__()
        self.channels = channels
        self.adapter = Conv1d(init, cond_channels, channels, 1)
        self.merge = Conv1d(init, 2 * channels, channels, 1)

    def forward(self, h, cond):
        a, adapter_cache = self.adapter.forward(cond)
        y, merge_cache = self.merge.forward(np.concatenate([h, a], axis=1))
        return y, (adapter_cache, merge_cache)

    def backward(self, dy, cache):
        adapter_cache, merge_cache = cache
        dcat = self.merge.backward(dy, merge_cache)
        dcond = self.adapter.backward(np.ascontiguousarray(dcat[:, self.channels:]), adapter_cache)
        return dcat[:, :self.channels], dcond


def _accumulate(total, grad):
    return grad if total is None else total + grad


class EncoderLevel(Module):
    def __init__(self, init: ParamFactory, config: ModelConfig, level: int, in_channels: int):
        super().__init__()
        channels = config.generator_channels()[level]
        factor = config.down_factors[level]
        heads = config.attention_heads if level in config.attention_levels else None
        self.down = Conv1d(init, in_channels, channels, factor, stride=factor) if factor > 1 else None
        self.inject = (Injection(init, config.conditioner_channels()[level], channels)
                       if level in config.conditioning_levels else None)
        self.blocks = ModuleList(ResBlock(init, channels, config.step_embed_channels, heads)
                                 for _ in range(config.generator_blocks_per_level[level]))

    def forward(self, h, emb, cond):
        down_cache = inject_cache = None
        if self.down is not None:
            h, down_cache = self.down.forward(h)
        if self.inject is not None:
            h, inject_cache = self.inject.forward(h, cond)
        block_caches = []
        for block in self.blocks:
            h, c = block.forward(h, emb)
            block_caches.append(c)
        return h, (down_cache, inject_cache, block_caches)

    def backward(self, dh, cache):
        down_cache, inject_cache, block_caches = cache
        demb = dcond = None
        for block, c in zip(reversed(list(self.blocks)), reversed(block_caches)):
            dh, d = block.backward(dh, c)
            demb = _accumulate(demb, d)
        if self.inject is not None:
            dh, dcond = self.inject.backward(dh, inject_cache)
        if self.down is not None:
            dh = self.down.backward(dh, down_cache)
        return dh, demb, dcond


class DecoderLevel(Module):
    def __init__(self, init: ParamFactory, config: ModelConfig, level: int, out_channels: int):
        super().__init__()
        channels = config.generator_channels()[level]
        factor = config.down_factors[level]
        heads = config.attention_heads if level in config.attention_levels else None
        self.skip_merge = Conv1d(init, 2 * channels, channels, 1)
        self.inject = (Injection(init, config.conditioner_channels()[level], channels)
                       if level in config.conditioning_levels else None)
        self.blocks = ModuleList(ResBlock(init, channels, config.step_embed_channels, heads)
                                 for _ in range(config.generator_blocks_per_level[level]))
        self.up = ConvTranspose1d(init, channels, out_channels, factor) if factor > 1 else None

    def forward(self, h, skip, emb, cond):
        h, merge_cache = self.skip_merge.forward(np.concatenate([h, skip], axis=1))
        inject_cache = up_cache = None
        if self.inject is not None:
            h, inject_cache = self.inject.forward(h, cond)
        block_caches = []
        for block in self.blocks:
            h, c = block.forward(h, emb)
            block_caches.append(c)
        if self.up is not None:
            h, up_cache = self.up.forward(h)
        return h, (merge_cache, inject_cache, block_caches, up_cache)

    def backward(self, dh, cache):
        """Returns (d_input, d_skip, d_step_embedding, d_conditioning)."""
        merge_cache, inject_cache, block_caches, up_cache = cache
        if self.up is not None:
            dh = self.up.backward(dh, up_cache)
        demb = dcond = None
        for block, c in zip(reversed(list(self.blocks)), reversed(block_caches)):
            dh, d = block.backward(dh, c)
            demb = _accumulate(demb, d)
        if self.inject is not None:
            dh, dcond = self.inject.backward(dh, inject_cache)
        dcat = self.skip_merge.backward(dh, merge_cache)
        half = dcat.shape[1] // 2
        return dcat[:, :half], dcat[:, half:], demb, dcond


class Generator(Module):
    """
    U-Net velocity predictor m(x_t, sigma, embeddings).

    Conditioning embeddings are injected at the configured levels in both the encoder and
    the decoder, each site with its own 1x1 adapter.
    """

    def __init__(self, config: ModelConfig, init: ParamFactory):
        super().__init__()
        self.config = config
        channels = config.generator_channels()
        base = config.generator_base_channels
        self.step_embedding = StepEmbedding(init, config.fourier_embed_channels, config.step_embed_channels)
        self.stem = Conv1d(init, config.channel_count, base, 3)
        self.encoder = ModuleList(EncoderLevel(init, config, i, channels[i - 1] if i else base)
                                  for i in range(config.levels))
        last = config.levels - 1
        self.mid = ResBlock(init, channels[last], config.step_embed_channels,
                            config.attention_heads if last in config.attention_levels else None)
        self.decoder = ModuleList(DecoderLevel(init, config, i, channels[i - 1] if i else base)
                                  for i in range(config.levels))
        self.head = Sequential([GroupNorm(init, base), Activation("silu"),
                                Conv1d(init, base, config.channel_count, 3)])

    def forward(self, x_t, sigma, embeddings: Dict[int, np.ndarray]):
        emb, emb_cache = self.step_embedding.forward(sigma)
        h, stem_cache = self.stem.forward(x_t)
        skips, enc_caches = [], []
        for i, level in enumerate(self.encoder):
            h, c = level.forward(h, emb, embeddings.get(i))
            skips.append(h)
            enc_caches.append(c)
        h, mid_cache = self.mid.forward(h, emb)
        dec_caches = {}
        for i in reversed(range(self.config.levels)):
            h, dec_caches[i] = self.decoder[i].forward(h, skips[i], emb, embeddings.get(i))
        v, head_cache = self.head.forward(h)
        if not np.all(np.isfinite(v)):
            raise NumericFailureError("Generator produced non-finite output")
        return v, (emb_cache, stem_cache, enc_caches, mid_cache, dec_caches, head_cache)

    def backward(self, dv, cache) -> Dict[int, np.ndarray]:
        """Accumulates parameter gradients; returns gradients w.r.t. the conditioning embeddings."""
        emb_cache, stem_cache, enc_caches, mid_cache, dec_caches, head_cache = cache
        dh = self.head.backward(dv, head_cache)
        demb = None
        dcond: Dict[int, np.ndarray] = {}
        dskips = {}
        for i in range(self.config.levels):
            dh, dskips[i], d, dc = self.decoder[i].backward(dh, dec_caches[i])
            demb = _accumulate(demb, d)
            if dc is not None:
                dcond[i] = dc
        dh, d = self.mid.backward(dh, mid_cache)
        demb = _accumulate(demb, d)
        for i in reversed(range(self.config.levels)):
            dh, d, dc = self.encoder[i].backward(dh + dskips[i], enc_caches[i])
            demb = _accumulate(demb, d)
            if dc is not None:
                dcond[i] = dcond[i] + dc if i in dcond else dc
        self.stem.backward(dh, stem_cache)
        self.step_embedding.backward(demb, emb_cache)
        return dcond

    def __call__(self, x_t, sigma, embeddings):
        return self.forward(x_t, sigma, embeddings)[0]
