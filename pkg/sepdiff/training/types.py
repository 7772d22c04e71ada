from dataclasses import dataclass
from typing import List

import numpy as np

from ..errors import ConfigError, NumericFailureError


@dataclass(frozen=True)
class TrainingConfig:
    """Optimizer, loss weighting, data filtering and augmentation settings for one run."""
    batch_size: int = 4
    learning_rate: float = 1e-3
    weight_decay: float = 1e-3
    warmup_steps: int = 200
    total_steps: int = 20000
    cosine_annealing: bool = True
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    aux_latent_weight: float = 1.0
    aux_reconstruction_weight: float = 1.0
    silence_rms_db: float = -60.0
    silence_keep_prob: float = 0.05
    augment_polarity: bool = True
    augment_channel_flip: bool = True
    augment_remix: bool = True
    augment_prob: float = 0.5
    chunk_seconds: float = 1.0
    checkpoint_every: int = 0
    log_every: int = 50
    seed: int = 0

    def __post_init__(self):
        problems = self._problems()
        if problems:
            raise ConfigError("Invalid TrainingConfig: " + "; ".join(problems))

    def _problems(self) -> List[str]:
        problems = []
        if self.batch_size < 1:
            problems.append("batch_size must be >= 1")
        if not self.learning_rate > 0:
            problems.append("learning_rate must be > 0")
        if self.weight_decay < 0:
            problems.append("weight_decay must be >= 0")
        if self.warmup_steps < 0 or self.total_steps < 0:
            problems.append("warmup_steps and total_steps must be >= 0")
        if self.total_steps < self.warmup_steps:
            problems.append(f"total_steps ({self.total_steps}) must be >= warmup_steps ({self.warmup_steps})")
        for name in ("adam_beta1", "adam_beta2"):
            if not 0.0 <= getattr(self, name) < 1.0:
                problems.append(f"{name} must lie in [0, 1)")
        if not self.adam_eps > 0:
            problems.append("adam_eps must be > 0")
        if self.aux_latent_weight < 0 or self.aux_reconstruction_weight < 0:
            problems.append("auxiliary loss weights must be >= 0")
        for name in ("silence_keep_prob", "augment_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                problems.append(f"{name} must lie in [0, 1]")
        if not np.isfinite(self.silence_rms_db):
            problems.append("silence_rms_db must be finite")
        if not self.chunk_seconds > 0:
            problems.append("chunk_seconds must be > 0")
        if self.checkpoint_every < 0 or self.log_every < 0:
            problems.append("checkpoint_every and log_every must be >= 0")
        return problems


@dataclass
class LossReport:
    """Unweighted loss terms of one step and the weighted total that was minimised."""
    l_diff: float
    l_lat: float
    l_rec: float
    total: float

    def __post_init__(self):
        for name in ("l_diff", "l_lat", "l_rec", "total"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise NumericFailureError(f"Loss term {name} is not finite ({value})")
