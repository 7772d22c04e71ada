import dataclasses
import os
from typing import Callable, List, Optional, Sequence

from tqdm import tqdm

from ..audio import AudioBuffer, DatasetItem, load_item, read_wav, write_wav
from ..audio.dataset import TARGET_FILE
from ..diffusion import Denoiser, SamplerConfig, separate
from ..dsp import ChunkPlan
from ..errors import EmptyDatasetError, InvalidArgumentError
from ..fileio import write_csv
from ..output import is_quiet, output
from .measures import sdr, sir
from .types import EvalResult, RepeatSummary, RunInfo, TrackScore

EVAL_HEADER = ["track", "sdr_db", "sir_db", "baseline_sdr_db", "improvement_db",
               "T", "eta", "cutoff_hz", "seed", "repeat_index"]
MEDIAN_ROW = "median"
MEAN_ROW = "mean"


def score_track(name: str, mixture: AudioBuffer, vocals: AudioBuffer, estimate: AudioBuffer,
                repeat_index: int = 0) -> TrackScore:
    vocals.check_compatible(estimate, "estimate")
    accompaniment = mixture.samples.astype("float64") - vocals.samples
    return TrackScore(
        track=name,
        sdr_db=sdr(vocals, estimate),
        sir_db=sir(vocals, accompaniment, estimate),
        baseline_sdr_db=sdr(vocals, mixture),
        repeat_index=repeat_index,
    )


def _require(items: Sequence[DatasetItem]):
    if not items:
        raise EmptyDatasetError("Nothing to evaluate: the dataset has no tracks")


def estimate_path(estimates_dir: str, track: str) -> str:
    """Estimates mirror the dataset layout: <dir>/<track>/vocals.wav"""
    return os.path.join(estimates_dir, track, TARGET_FILE)


def evaluate_estimates(items: Sequence[DatasetItem], estimates_dir: str) -> EvalResult:
    """Scores precomputed estimates; passing the dataset itself gives the oracle ceiling."""
    _require(items)
    scores = []
    for item in tqdm(items, desc="eval", unit="track", disable=is_quiet()):
        mixture, vocals = load_item(item)
        estimate = read_wav(estimate_path(estimates_dir, item.name), channels=vocals.channels,
                            frames=vocals.length)
        scores.append(score_track(item.name, mixture, vocals, estimate))
    return EvalResult(scores=scores)


def repeat_count(cfg: SamplerConfig, repeats: int) -> int:
    """Deterministic sampling gives identical repeats, so only one is run."""
    if repeats < 1:
        raise InvalidArgumentError(f"repeats must be >= 1, got {repeats}")
    if cfg.deterministic and repeats > 1:
        output("info", f"eta=0 is deterministic; running 1 repeat instead of {repeats}")
        return 1
    return repeats


def evaluate_model(items: Sequence[DatasetItem], denoiser: Denoiser, cfg: SamplerConfig, plan: ChunkPlan,
                   repeats: int = 5, workers: int = 1, estimates_out: Optional[str] = None,
                   on_track_done: Optional[Callable[[TrackScore], None]] = None) -> EvalResult:
    """
    Separates every track and scores it. Each repeat reuses the initial noise and draws
    fresh refinement noise; results are reported per repeat and as the mean of medians.
    """
    _require(items)
    channels = getattr(denoiser, "channel_count", None)
    scores: List[TrackScore] = []
    runs = repeat_count(cfg, repeats)
    bar = tqdm(total=runs * len(items), desc="eval", unit="track", disable=is_quiet())
    for repeat in range(runs):
        repeat_cfg = dataclasses.replace(cfg, repeat_index=repeat)
        for item in items:
            mixture, vocals = load_item(item, channels=channels)
            estimate, _ = separate(mixture, denoiser, repeat_cfg, plan, workers=workers)
            if estimates_out and repeat == 0:
                write_wav(estimate_path(estimates_out, item.name), estimate)
            score = score_track(item.name, mixture, vocals, estimate, repeat)
            scores.append(score)
            if on_track_done is not None:
                on_track_done(score)
            bar.update(1)
    bar.close()
    run = RunInfo(steps=cfg.steps, eta=cfg.eta, cutoff_hz=cfg.cutoff_hz, seed=cfg.seed)
    return EvalResult(scores=scores, run=run)


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _run_columns(run: RunInfo) -> list:
    eta = None if run.eta is None else float(run.eta)
    cutoff = None if run.cutoff_hz is None else float(run.cutoff_hz)
    return [_fmt(run.steps), _fmt(eta), _fmt(cutoff), _fmt(run.seed)]


def summary_row(label: str, summary: RepeatSummary, run: RunInfo) -> list:
    return [label, _fmt(summary.median_sdr_db), _fmt(summary.median_sir_db),
            _fmt(summary.median_baseline_sdr_db), _fmt(summary.median_improvement_db),
            *_run_columns(run), summary.repeat_index]


def result_rows(result: EvalResult, per_track: bool = True) -> List[list]:
    """Per-track rows (optional), one median row per repeat, then the mean-of-medians row."""
    rows = []
    for summary in result.summaries():
        if per_track:
            rows += [[s.track, _fmt(s.sdr_db), _fmt(s.sir_db), _fmt(s.baseline_sdr_db),
                      _fmt(s.improvement_db), *_run_columns(result.run), s.repeat_index]
                     for s in result.scores if s.repeat_index == summary.repeat_index]
        rows.append(summary_row(MEDIAN_ROW, summary, result.run))
    rows.append(summary_row(MEAN_ROW, result.mean_summary(), result.run))
    return rows


def write_eval_csv(path: str, result: EvalResult):
    write_csv(path, "eval", EVAL_HEADER, result_rows(result))


def report(result: EvalResult):
    mean = result.mean_summary()
    output("summary", f"{result.track_count} tracks, {len(result.repeats)} repeat(s): "
                      f"median SDR {mean.median_sdr_db:.2f} dB, SIR {mean.median_sir_db:.2f} dB")
    output("info_detail", f"mixture baseline {mean.median_baseline_sdr_db:.2f} dB, "
                          f"median improvement {mean.median_improvement_db:+.2f} dB")
