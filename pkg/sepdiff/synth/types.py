from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..errors import ConfigError


@dataclass(frozen=True)
class SynthSpec:
    """
    Recipe for a synthetic vocals-over-accompaniment dataset.

    The voice is a harmonic tone with a random-walk fundamental, 1/k partials, vibrato and
    phrase envelopes separated by silent gaps. The accompaniment is band-limited noise plus
    sustained triads, scaled so the track-level vocals/accompaniment ratio is `snr_db`.
    """
    track_count: int = 64
    test_track_count: int = 16
    duration_s: float = 12.0
    sample_rate: int = 44100
    channels: int = 2
    f0_min_hz: float = 120.0
    f0_max_hz: float = 500.0
    f0_step_semitones: float = 2.0
    note_seconds: float = 0.25
    partials: int = 48
    vibrato_rate_hz: float = 5.5
    vibrato_depth_cents: float = 30.0
    silence_fraction: float = 0.15
    phrase_seconds: float = 2.0
    noise_gain: float = 0.4
    noise_band_hz: Tuple[float, float] = (100.0, 4000.0)
    pad_gain: float = 1.0
    chord_seconds: float = 2.0
    snr_db_min: float = -6.0
    snr_db_max: float = 6.0
    peak_dbfs: float = -1.0
    seed: int = 0

    def __post_init__(self):
        problems = self._problems()
        if problems:
            raise ConfigError("Invalid SynthSpec: " + "; ".join(problems))

    def _problems(self) -> List[str]:
        problems = []
        if self.track_count < 1 or self.test_track_count < 0:
            problems.append("track_count must be >= 1 and test_track_count >= 0")
        if not self.duration_s > 0 or self.sample_rate < 1 or self.channels < 1:
            problems.append("duration_s, sample_rate and channels must be positive")
        if not 50.0 < self.f0_min_hz <= self.f0_max_hz < 1000.0:
            problems.append(f"fundamental range ({self.f0_min_hz}, {self.f0_max_hz}) must lie within (50, 1000) Hz")
        if self.partials < 1:
            problems.append("partials must be >= 1")
        if not 0.1 <= self.silence_fraction < 0.9:
            problems.append("silence_fraction must lie in [0.1, 0.9)")
        if not (np.isfinite(self.snr_db_min) and np.isfinite(self.snr_db_max)) or self.snr_db_min > self.snr_db_max:
            problems.append("snr_db_min <= snr_db_max must both be finite")
        low, high = self.noise_band_hz
        if not 0 < low < high:
            problems.append("noise_band_hz must be an increasing pair of positive frequencies")
        if self.peak_dbfs > 0:
            problems.append("peak_dbfs must be <= 0")
        for name in ("note_seconds", "phrase_seconds", "chord_seconds"):
            if not getattr(self, name) > 0:
                problems.append(f"{name} must be > 0")
        return problems

    @property
    def frames(self) -> int:
        return int(round(self.duration_s * self.sample_rate))
