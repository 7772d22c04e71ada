from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional, Protocol, Tuple

import numpy as np

from ..errors import InvalidArgumentError


class Spacing(Enum):
    LINEAR = "linear"


@dataclass(frozen=True)
class NoiseSchedule:
    """Ascending noise levels sigmas[0] = 0 .. sigmas[T] = 1."""
    sigmas: Tuple[float, ...]
    spacing: Spacing = Spacing.LINEAR

    def __post_init__(self):
        s = np.asarray(self.sigmas, dtype=np.float64)
        if s.size < 2:
            raise InvalidArgumentError("A noise schedule needs at least two levels")
        if s[0] != 0.0 or s[-1] != 1.0:
            raise InvalidArgumentError(f"Schedule must run from 0 to 1, got {s[0]}..{s[-1]}")
        if np.any(np.diff(s) <= 0):
            raise InvalidArgumentError("Schedule must be strictly ascending")

    @property
    def steps(self) -> int:
        return len(self.sigmas) - 1

    def __len__(self):
        return len(self.sigmas)

    def reverse_pairs(self):
        """Yields (t, sigma_t, sigma_prev) from t = T down to t = 1."""
        for t in range(self.steps, 0, -1):
            yield t, self.sigmas[t], self.sigmas[t - 1]


@dataclass(frozen=True)
class DiffusionCoeffs:
    alpha: float
    beta: float
    phi: float


@dataclass(frozen=True)
class SamplerConfig:
    steps: int = 50
    eta: float = 0.4
    cutoff_hz: Optional[float] = 5000.0  # None leaves the refinement noise unfiltered
    seed: int = 0
    filter_order: int = 4
    repeat_index: int = 0  # selects the refinement noise stream; the initial noise is shared

    def __post_init__(self):
        if self.steps < 1:
            raise InvalidArgumentError(f"steps must be >= 1, got {self.steps}")
        if self.eta < 0:
            raise InvalidArgumentError(f"eta must be >= 0, got {self.eta}")
        if self.cutoff_hz is not None and self.cutoff_hz <= 0:
            raise InvalidArgumentError(f"cutoff_hz must be positive, got {self.cutoff_hz}")
        if self.repeat_index < 0:
            raise InvalidArgumentError(f"repeat_index must be >= 0, got {self.repeat_index}")

    def validate_for(self, sample_rate: int):
        if self.cutoff_hz is not None and self.cutoff_hz >= sample_rate / 2:
            raise InvalidArgumentError(
                f"cutoff_hz {self.cutoff_hz} must lie below Nyquist ({sample_rate / 2} Hz)")

    @property
    def deterministic(self) -> bool:
        return self.eta == 0


@dataclass(frozen=True)
class StepDiagnostics:
    t: int
    sigma: float
    delta: float
    beta_prime: float
    x0_estimate_rms: float


class Denoiser(Protocol):
    """
    Velocity predictor m(x_t, sigma, c).

    `prepare` turns the raw conditioning mixture (channels, length) into whatever the
    predictor needs, once per sampling run; `predict_v` must not mutate any state.
    """

    def prepare(self, condition: np.ndarray) -> Any:
        ...

    def predict_v(self, x_t: np.ndarray, sigma: float, prepared: Any) -> np.ndarray:
        ...
