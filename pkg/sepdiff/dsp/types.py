from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..errors import InvalidArgumentError


@dataclass(frozen=True)
class BiquadSection:
    b0: float
    b1: float
    b2: float
    a1: float
    a2: float

    def as_sos_row(self) -> Tuple[float, ...]:
        return (self.b0, self.b1, self.b2, 1.0, self.a1, self.a2)

    def is_stable(self) -> bool:
        poles = np.roots([1.0, self.a1, self.a2])
        return bool(np.all(np.abs(poles) < 1.0))


@dataclass(frozen=True)
class BiquadCascade:
    sections: Tuple[BiquadSection, ...]
    sample_rate: int
    cutoff_hz: float

    def __post_init__(self):
        if not self.sections:
            raise InvalidArgumentError("A biquad cascade needs at least one section")
        for i, section in enumerate(self.sections):
            if not section.is_stable():
                raise InvalidArgumentError(f"Biquad section {i} is unstable")

    @property
    def order(self) -> int:
        return 2 * len(self.sections)

    @property
    def sos(self) -> np.ndarray:
        return np.array([s.as_sos_row() for s in self.sections], dtype=np.float64)


@dataclass(frozen=True)
class ChunkPlan:
    chunk_len: int
    overlap: float = 0.2

    def __post_init__(self):
        if self.chunk_len < 1:
            raise InvalidArgumentError(f"chunk_len must be >= 1, got {self.chunk_len}")
        if not 0.0 <= self.overlap < 0.5:
            raise InvalidArgumentError(f"overlap must lie in [0, 0.5), got {self.overlap}")
        if self.hop < 1:
            raise InvalidArgumentError(f"hop must be >= 1 (chunk_len={self.chunk_len}, overlap={self.overlap})")

    @property
    def overlap_len(self) -> int:
        return int(np.floor(self.overlap * self.chunk_len))

    @property
    def hop(self) -> int:
        return self.chunk_len - self.overlap_len

    @classmethod
    def from_seconds(cls, seconds: float, sample_rate: int, overlap: float = 0.2,
                     multiple_of: int = 1) -> "ChunkPlan":
        """Chunk length in samples, rounded down to a multiple of `multiple_of`."""
        length = int(round(seconds * sample_rate))
        length -= length % multiple_of
        if length < 1:
            raise InvalidArgumentError(
                f"Chunk of {seconds} s at {sample_rate} Hz is shorter than {multiple_of} samples")
        return cls(chunk_len=length, overlap=overlap)
