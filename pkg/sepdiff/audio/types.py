from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..errors import InvalidArgumentError


class WavFormat(Enum):
    PCM16 = "pcm16"
    FLOAT32 = "float32"


class DatasetLayout(Enum):
    PAIRED_SUBDIRS = "paired_subdirs"


@dataclass(frozen=True, eq=False)
class AudioBuffer:
    """Multichannel time-domain audio, samples shaped (channels, length)."""
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float32)
        if samples.ndim != 2:
            raise InvalidArgumentError(f"AudioBuffer expects (channels, length), got shape {samples.shape}")
        if samples.shape[0] < 1 or samples.shape[1] < 1:
            raise InvalidArgumentError(f"AudioBuffer must not be empty, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise InvalidArgumentError("AudioBuffer samples must be finite")
        if self.sample_rate <= 0:
            raise InvalidArgumentError(f"Sample rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def length(self) -> int:
        return self.samples.shape[1]

    @property
    def shape(self):
        return self.samples.shape

    @property
    def duration(self) -> float:
        return self.length / self.sample_rate

    def with_samples(self, samples: np.ndarray) -> "AudioBuffer":
        return AudioBuffer(samples, self.sample_rate)

    def check_compatible(self, other: "AudioBuffer", what: str = "buffers"):
        if self.shape != other.shape:
            raise InvalidArgumentError(f"Shape mismatch between {what}: {self.shape} vs {other.shape}")
        if self.sample_rate != other.sample_rate:
            raise InvalidArgumentError(
                f"Sample rate mismatch between {what}: {self.sample_rate} vs {other.sample_rate}")


@dataclass(frozen=True)
class DatasetItem:
    name: str
    mixture_path: str
    target_path: str
    duration: float  # seconds, after trimming to the shorter file
    sample_rate: int
    channels: int
    frames: int
