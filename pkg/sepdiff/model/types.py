from dataclasses import dataclass, replace
from typing import Dict, List, Tuple

import numpy as np

from ..errors import ConfigError, InvalidArgumentError


@dataclass(frozen=True)
class ModelConfig:
    """Shared geometry of the conditioner and generator."""
    levels: int = 4
    down_factors: Tuple[int, ...] = (1, 4, 4, 4)
    generator_base_channels: int = 8
    conditioner_base_channels: int = 8
    generator_blocks_per_level: Tuple[int, ...] = (1, 1, 1, 1)
    attention_levels: Tuple[int, ...] = (3,)
    conditioning_levels: Tuple[int, ...] = (2, 3)
    bottleneck_transformer_layers: int = 2
    conditioner_attention: bool = True
    fourier_embed_channels: int = 32
    step_embed_channels: int = 32
    attention_heads: int = 1
    channel_count: int = 2
    sample_rate: int = 44100

    def __post_init__(self):
        problems = self._problems()
        if problems:
            raise ConfigError("Invalid ModelConfig: " + "; ".join(problems))

    def _problems(self) -> List[str]:
        problems = []
        if self.levels < 1:
            problems.append(f"levels must be >= 1, got {self.levels}")
        if len(self.down_factors) != self.levels:
            problems.append(f"down_factors needs {self.levels} entries, got {len(self.down_factors)}")
        if any(n < 1 for n in self.down_factors):
            problems.append("down_factors must all be >= 1")
        if len(self.generator_blocks_per_level) != self.levels:
            problems.append(f"generator_blocks_per_level needs {self.levels} entries")
        if any(b < 1 for b in self.generator_blocks_per_level):
            problems.append("generator_blocks_per_level must all be >= 1")
        for name in ("attention_levels", "conditioning_levels"):
            bad = [i for i in getattr(self, name) if not 0 <= i < self.levels]
            if bad:
                problems.append(f"{name} out of range: {bad}")
        if self.fourier_embed_channels < 2 or self.fourier_embed_channels % 2:
            problems.append("fourier_embed_channels must be a positive even number")
        if self.step_embed_channels < 1:
            problems.append("step_embed_channels must be >= 1")
        if self.bottleneck_transformer_layers < 0:
            problems.append("bottleneck_transformer_layers must be >= 0")
        if self.attention_heads < 1:
            problems.append("attention_heads must be >= 1")
        if self.channel_count < 1 or self.sample_rate < 1:
            problems.append("channel_count and sample_rate must be positive")
        if self.generator_base_channels < 1 or self.conditioner_base_channels < 1:
            problems.append("base channel counts must be positive")
        if problems:
            return problems

        for level in self.attention_levels:
            for c in (self.generator_channels()[level], self.conditioner_channels()[level]):
                if c % self.attention_heads:
                    problems.append(f"{c} channels at level {level} not divisible by {self.attention_heads} heads")
        if self.bottleneck_transformer_layers:
            c = self.conditioner_channels()[-1]
            if c % self.attention_heads or (c // self.attention_heads) % 2:
                problems.append(f"bottleneck head dimension must be even (channels {c}, heads {self.attention_heads})")
        return problems

    @property
    def total_downsampling(self) -> int:
        return int(np.prod(self.down_factors))

    def _channels(self, base: int) -> List[int]:
        channels, c = [], base
        for n in self.down_factors:
            if n > 1:
                c *= 2
            channels.append(c)
        return channels

    def generator_channels(self) -> List[int]:
        """Channels at each level; they double at every level that downsamples."""
        return self._channels(self.generator_base_channels)

    def conditioner_channels(self) -> List[int]:
        return self._channels(self.conditioner_base_channels)

    def level_lengths(self, length: int) -> List[int]:
        if length % self.total_downsampling:
            raise InvalidArgumentError(
                f"Length {length} is not a multiple of the total downsampling {self.total_downsampling}")
        lengths, t = [], length
        for n in self.down_factors:
            t //= n
            lengths.append(t)
        return lengths

    @property
    def bottleneck_channels(self) -> int:
        return self.conditioner_channels()[-1]


PRESETS: Dict[str, ModelConfig] = {
    "toy": ModelConfig(),
    "tiny": ModelConfig(
        levels=2, down_factors=(1, 2), generator_base_channels=2, conditioner_base_channels=2,
        generator_blocks_per_level=(1, 1), attention_levels=(1,), conditioning_levels=(0, 1),
        bottleneck_transformer_layers=1, conditioner_attention=False, fourier_embed_channels=4,
        step_embed_channels=4, channel_count=1, sample_rate=8000),
    "large": ModelConfig(
        levels=7, down_factors=(1, 2, 4, 1, 4, 1, 4), generator_base_channels=32,
        conditioner_base_channels=128, generator_blocks_per_level=(1, 1, 1, 2, 2, 2, 2),
        attention_levels=(3, 4, 5, 6), conditioning_levels=(3, 4, 5, 6),
        bottleneck_transformer_layers=6, fourier_embed_channels=1024, step_embed_channels=256,
        attention_heads=8),
}
PRESETS["large-plain"] = replace(PRESETS["large"], bottleneck_transformer_layers=0,
                                 conditioner_attention=False, attention_levels=())


def preset(name: str) -> ModelConfig:
    if name not in PRESETS:
        raise ConfigError(f"Unknown model preset '{name}'; choose from {', '.join(PRESETS)}")
    return PRESETS[name]


@dataclass
class ParameterReport:
    conditioner: int
    generator: int
    heads: int
    frozen: int = 0

    @property
    def total(self) -> int:
        return self.conditioner + self.generator + self.heads
