from typing import Optional, Tuple

import numpy as np

from .types import TrainingConfig


def rms_db(x: np.ndarray) -> float:
    """RMS level in dBFS; -inf for digital silence."""
    power = float(np.mean(np.square(x, dtype=np.float64)))
    if power == 0.0:
        return float("-inf")
    return 10.0 * np.log10(power)


def filter_and_augment(vocals: np.ndarray, mixture: np.ndarray, config: TrainingConfig,
                       rng: np.random.Generator,
                       remix_accompaniment: Optional[np.ndarray] = None) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """
    Returns an augmented (vocals, mixture) chunk pair, or None if the chunk is dropped.

    Chunks whose vocals sit below `silence_rms_db` survive with probability
    `silence_keep_prob`. The accompaniment is mixture - vocals; every augmentation acts on
    vocals and accompaniment separately and the mixture is rebuilt as their sum.
    """
    if rms_db(vocals) < config.silence_rms_db and rng.random() >= config.silence_keep_prob:
        return None

    target = vocals.astype(np.float64)
    accompaniment = mixture.astype(np.float64) - target
    # one draw per augmentation regardless of the flags so the stream stays aligned
    remix, flip_polarity, flip_channels = rng.random(3) < config.augment_prob

    if config.augment_remix and remix and remix_accompaniment is not None:
        accompaniment = np.asarray(remix_accompaniment, dtype=np.float64)
    if config.augment_polarity and flip_polarity:
        target = -target
    if config.augment_channel_flip and flip_channels and target.shape[0] > 1:
        target = target[::-1]
        accompaniment = accompaniment[::-1]

    target = np.ascontiguousarray(target, dtype=np.float32)
    accompaniment = np.ascontiguousarray(accompaniment, dtype=np.float32)
    return target, target + accompaniment
