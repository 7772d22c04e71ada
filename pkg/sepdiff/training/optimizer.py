import math
from typing import Dict, Iterable, Tuple

import numpy as np

from ..errors import InvalidArgumentError, NumericFailureError
from ..model.layers import Parameter
from .types import TrainingConfig


def learning_rate(step: int, config: TrainingConfig) -> float:
    """Linear warm-up to the peak rate, then cosine decay reaching 0 at total_steps."""
    peak = config.learning_rate
    if step < config.warmup_steps:
        return peak * step / config.warmup_steps
    if not config.cosine_annealing:
        return peak
    span = config.total_steps - config.warmup_steps
    if span <= 0:
        return peak
    progress = min(1.0, (step - config.warmup_steps) / span)
    return peak * 0.5 * (1.0 + math.cos(math.pi * progress))


class AdamW:
    """Adam moments with weight decay applied directly to the weights."""

    def __init__(self, named_parameters: Iterable[Tuple[str, Parameter]], config: TrainingConfig):
        self.config = config
        self.params = [(name, p) for name, p in named_parameters if p.trainable]
        self.first: Dict[str, np.ndarray] = {name: np.zeros_like(p.data) for name, p in self.params}
        self.second: Dict[str, np.ndarray] = {name: np.zeros_like(p.data) for name, p in self.params}
        self.updates = 0

    def step(self, step_index: int) -> float:
        """Applies one update from the accumulated gradients and returns the learning rate used."""
        cfg = self.config
        if step_index < 0 or (cfg.total_steps and step_index >= cfg.total_steps):
            raise InvalidArgumentError(f"Step {step_index} outside [0, {cfg.total_steps})")
        for name, p in self.params:
            if p.grad is not None and not np.all(np.isfinite(p.grad)):
                raise NumericFailureError("Non-finite gradient", where=name)

        lr = learning_rate(step_index, cfg)
        self.updates += 1
        correction1 = 1.0 - cfg.adam_beta1 ** self.updates
        correction2 = 1.0 - cfg.adam_beta2 ** self.updates
        for name, p in self.params:
            grad = p.grad_or_zeros()
            m, v = self.first[name], self.second[name]
            m *= cfg.adam_beta1
            m += (1.0 - cfg.adam_beta1) * grad
            v *= cfg.adam_beta2
            v += (1.0 - cfg.adam_beta2) * np.square(grad)
            update = (m / correction1) / (np.sqrt(v / correction2) + cfg.adam_eps)
            if cfg.weight_decay:
                update = update + cfg.weight_decay * p.data
            p.data -= (lr * update).astype(p.data.dtype)
        return lr
