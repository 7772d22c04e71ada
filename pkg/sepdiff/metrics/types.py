from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np


@dataclass(frozen=True)
class TrackScore:
    track: str
    sdr_db: float
    sir_db: float
    baseline_sdr_db: float  # the unprocessed mixture scored as the estimate
    repeat_index: int = 0

    @property
    def improvement_db(self) -> float:
        return self.sdr_db - self.baseline_sdr_db


@dataclass(frozen=True)
class RunInfo:
    """Sampler settings an evaluation ran with; None for precomputed estimates."""
    steps: Optional[int] = None
    eta: Optional[float] = None
    cutoff_hz: Optional[float] = None
    seed: Optional[int] = None


def _finite_median(values: List[float]) -> float:
    finite = [v for v in values if np.isfinite(v)]
    return float(np.median(finite)) if finite else float("nan")


@dataclass
class RepeatSummary:
    repeat_index: int
    median_sdr_db: float
    median_sir_db: float
    median_baseline_sdr_db: float
    median_improvement_db: float


@dataclass
class EvalResult:
    scores: List[TrackScore]
    run: RunInfo = field(default_factory=RunInfo)

    @property
    def repeats(self) -> List[int]:
        return sorted({s.repeat_index for s in self.scores})

    @property
    def track_count(self) -> int:
        return len({s.track for s in self.scores})

    def summary(self, repeat_index: int) -> RepeatSummary:
        scores = [s for s in self.scores if s.repeat_index == repeat_index]
        return RepeatSummary(
            repeat_index=repeat_index,
            median_sdr_db=_finite_median([s.sdr_db for s in scores]),
            median_sir_db=_finite_median([s.sir_db for s in scores]),
            median_baseline_sdr_db=_finite_median([s.baseline_sdr_db for s in scores]),
            median_improvement_db=_finite_median([s.improvement_db for s in scores]),
        )

    def summaries(self) -> List[RepeatSummary]:
        return [self.summary(r) for r in self.repeats]

    def mean_summary(self) -> RepeatSummary:
        """Per-repeat medians averaged over repeats."""
        summaries = self.summaries()

        def mean(name):
            return float(np.mean([getattr(s, name) for s in summaries]))

        return RepeatSummary(
            repeat_index=-1,
            median_sdr_db=mean("median_sdr_db"),
            median_sir_db=mean("median_sir_db"),
            median_baseline_sdr_db=mean("median_baseline_sdr_db"),
            median_improvement_db=mean("median_improvement_db"),
        )

    @property
    def median_sdr_db(self) -> float:
        return self.mean_summary().median_sdr_db

    @property
    def median_sir_db(self) -> float:
        return self.mean_summary().median_sir_db
