import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from ..audio import DatasetItem, load_item
from ..errors import EmptyDatasetError, InvalidArgumentError
from ..fileio import append_csv, write_csv
from ..model.network import SeparationModel, parameter_count
from ..model.serialization import save_model
from ..output import is_quiet, output
from ..streams import SubStream, make_rng
from .augment import filter_and_augment
from .losses import draw_noise, total_loss
from .optimizer import AdamW
from .types import LossReport, TrainingConfig

LOSS_HEADER = ["step", "l_diff", "l_lat", "l_rec", "lr"]
MAX_REJECTED_CHUNKS = 1000

Batch = Tuple[np.ndarray, np.ndarray]


def loss_curve_path(model_path: str) -> str:
    """model.npz -> model.loss.csv"""
    return os.path.splitext(model_path)[0] + ".loss.csv"


def checkpoint_path(model_path: str, step: int) -> str:
    return f"{model_path}.step{step}.npz"


class ChunkSampler:
    """Draws filtered, augmented training chunks; batch `step` depends only on (seed, step)."""

    def __init__(self, items: Sequence[DatasetItem], model: SeparationModel, config: TrainingConfig):
        self.config = config
        self.channels = model.channel_count
        self.multiple = model.config.total_downsampling
        frames = int(round(config.chunk_seconds * model.sample_rate))
        self.frames = frames - frames % self.multiple
        if self.frames < self.multiple:
            raise InvalidArgumentError(
                f"chunk_seconds={config.chunk_seconds} is shorter than {self.multiple} samples")

        wrong_rate = [item.name for item in items if item.sample_rate != model.sample_rate]
        if wrong_rate:
            raise InvalidArgumentError(
                f"Tracks {', '.join(wrong_rate[:3])} are not at the model rate of {model.sample_rate} Hz")
        self.items = [item for item in items if item.frames >= self.frames]
        if len(self.items) < len(items):
            output("warning", f"Skipping {len(items) - len(self.items)} track(s) shorter than one chunk")
        if not self.items:
            raise EmptyDatasetError("No track is long enough for one training chunk")

    def _random_chunk(self, rng: np.random.Generator,
                      exclude: Optional[int] = None) -> Tuple[int, np.ndarray, np.ndarray]:
        """Returns (item index, vocals, mixture) from a random track other than `exclude`."""
        if exclude is None:
            index = int(rng.integers(len(self.items)))
        else:
            index = int(rng.integers(len(self.items) - 1))
            index += index >= exclude
        item = self.items[index]
        start = int(rng.integers(item.frames - self.frames + 1))
        mixture, vocals = load_item(item, self.channels, start, self.frames)
        return index, vocals.samples, mixture.samples

    def batch(self, step: int) -> Batch:
        rng = make_rng(self.config.seed, SubStream.AUGMENTATION, step)
        targets, mixtures = [], []
        rejected = 0
        while len(targets) < self.config.batch_size:
            index, vocals, mixture = self._random_chunk(rng)
            remix = None
            if self.config.augment_remix and len(self.items) > 1:
                _, other_vocals, other_mixture = self._random_chunk(rng, exclude=index)
                remix = other_mixture - other_vocals
            pair = filter_and_augment(vocals, mixture, self.config, rng, remix)
            if pair is None:
                rejected += 1
                if rejected >= MAX_REJECTED_CHUNKS:
                    raise EmptyDatasetError(
                        f"{rejected} chunks in a row were dropped as silent; check silence_rms_db")
                continue
            targets.append(pair[0])
            mixtures.append(pair[1])
        return np.stack(targets), np.stack(mixtures)


class Trainer:
    """
    Runs the optimisation loop: one batch per step, loss curve CSV beside the model,
    periodic checkpoints and the final model at `out_path`.
    """

    def __init__(self, model: SeparationModel, items: Sequence[DatasetItem], config: TrainingConfig,
                 out_path: str):
        self.model = model
        self.config = config
        self.out_path = out_path
        self.sampler = ChunkSampler(items, model, config)
        self.optimizer = AdamW(model.named_parameters(), config)

    def _report_model(self):
        report = parameter_count(self.model.config)
        output("info", f"Model parameters: {report.total:,} "
                       f"(conditioner {report.conditioner:,}, generator {report.generator:,}, "
                       f"heads {report.heads:,}, frozen {report.frozen:,})")
        output("info_detail", f"{len(self.sampler.items)} tracks, chunks of {self.sampler.frames} samples")

    def step(self, step: int, batch: Batch) -> Tuple[LossReport, float]:
        x0, c = batch
        rng = make_rng(self.config.seed, SubStream.TRAINING, step)
        sigma, eps = draw_noise(rng, x0)
        self.model.zero_grad()
        report = total_loss(self.model, x0, c, sigma, eps,
                            self.config.aux_latent_weight, self.config.aux_reconstruction_weight)
        lr = self.optimizer.step(step)
        return report, lr

    def run(self, on_report: Optional[Callable[[int, LossReport], None]] = None) -> List[LossReport]:
        cfg = self.config
        self._report_model()
        curve_path = loss_curve_path(self.out_path)
        write_csv(curve_path, "loss", LOSS_HEADER, [])
        if cfg.total_steps == 0:
            output("warning", "total_steps is 0; saving the initial model unchanged")
            save_model(self.out_path, self.model)
            return []

        reports: List[LossReport] = []
        pending: List[list] = []
        # the next batch is read while the current step runs
        with ThreadPoolExecutor(max_workers=1) as loader:
            future = loader.submit(self.sampler.batch, 0)
            bar = tqdm(range(cfg.total_steps), desc="train", unit="step", disable=is_quiet())
            for step in bar:
                batch = future.result()
                if step + 1 < cfg.total_steps:
                    future = loader.submit(self.sampler.batch, step + 1)
                report, lr = self.step(step, batch)
                reports.append(report)
                pending.append([step, report.l_diff, report.l_lat, report.l_rec, lr])
                bar.set_postfix(loss=f"{report.total:.4f}", lr=f"{lr:.2e}")
                if on_report is not None:
                    on_report(step, report)

                done = step + 1
                if cfg.log_every and done % cfg.log_every == 0:
                    append_csv(curve_path, "loss", LOSS_HEADER, pending)
                    pending = []
                if cfg.checkpoint_every and done % cfg.checkpoint_every == 0 and done < cfg.total_steps:
                    save_model(checkpoint_path(self.out_path, done), self.model)
            bar.close()
        if pending:
            append_csv(curve_path, "loss", LOSS_HEADER, pending)

        save_model(self.out_path, self.model)
        last = reports[-1]
        output("summary", f"Trained {cfg.total_steps} steps; final loss {last.total:.4f} "
                          f"(diff {last.l_diff:.4f}, lat {last.l_lat:.4f}, rec {last.l_rec:.4f})")
        return reports


def train(model: SeparationModel, items: Sequence[DatasetItem], config: TrainingConfig,
          out_path: str) -> List[LossReport]:
    return Trainer(model, items, config, out_path).run()
