import dataclasses
import itertools
import os
from dataclasses import dataclass
from typing import List, Optional, Sequence, Set, Tuple

from tqdm import tqdm

from ..audio import DatasetItem
from ..diffusion import Denoiser, SamplerConfig
from ..dsp import ChunkPlan
from ..errors import InvalidArgumentError
from ..fileio import append_csv, read_csv
from ..output import is_quiet, output
from .evaluate import EVAL_HEADER, MEAN_ROW, evaluate_model, result_rows
from .types import EvalResult

Cell = Tuple[int, float, Optional[float]]


@dataclass(frozen=True)
class AblationGrid:
    """Sampling settings swept as a full Cartesian product."""
    steps: Tuple[int, ...] = (20, 50, 100)
    etas: Tuple[float, ...] = (0.0, 0.2, 0.4, 0.8)
    cutoffs_hz: Tuple[Optional[float], ...] = (None, 600.0, 2000.0, 5000.0)

    def __post_init__(self):
        if not self.steps or not self.etas or not self.cutoffs_hz:
            raise InvalidArgumentError("Every ablation axis needs at least one value")

    def cells(self) -> List[Cell]:
        return list(itertools.product(self.steps, self.etas, self.cutoffs_hz))


def parse_cutoff(text: str) -> Optional[float]:
    text = text.strip().lower()
    if text in ("none", "off", ""):
        return None
    try:
        return float(text)
    except ValueError:
        raise InvalidArgumentError(f"Invalid cutoff '{text}'; use a frequency in Hz or 'none'")


def _cell_key(steps, eta, cutoff) -> Tuple[str, str, str]:
    return (str(int(steps)), f"{float(eta):.6f}", "none" if cutoff is None else f"{float(cutoff):.6f}")


def completed_cells(csv_path: str) -> Set[Tuple[str, str, str]]:
    """Cells whose closing mean row is already in the CSV."""
    return {(row["T"], row["eta"], row["cutoff_hz"]) for row in read_csv(csv_path) if row.get("track") == MEAN_ROW}


def run_ablation(items: Sequence[DatasetItem], denoiser: Denoiser, grid: AblationGrid, base: SamplerConfig,
                 plan: ChunkPlan, csv_path: str, repeats: int = 5, workers: int = 1) -> List[EvalResult]:
    """
    Evaluates every grid cell and appends one median row per (cell, repeat) plus the
    cell's mean row. Cells already closed in an existing CSV are skipped, so an
    interrupted sweep resumes where it stopped.
    """
    done = completed_cells(csv_path) if os.path.exists(csv_path) else set()
    cells = grid.cells()
    todo = [cell for cell in cells if _cell_key(*cell) not in done]
    if len(todo) < len(cells):
        output("info", f"Resuming: {len(cells) - len(todo)} of {len(cells)} cells already in {csv_path}")

    results = []
    for steps, eta, cutoff in tqdm(todo, desc="ablate", unit="cell", disable=is_quiet()):
        cfg = dataclasses.replace(base, steps=steps, eta=eta, cutoff_hz=cutoff, repeat_index=0)
        result = evaluate_model(items, denoiser, cfg, plan, repeats=repeats, workers=workers)
        append_csv(csv_path, "eval", EVAL_HEADER, result_rows(result, per_track=False))
        mean = result.mean_summary()
        output("progress", f"T={steps} eta={eta} cutoff={cutoff or 'none'}: "
                           f"median SDR {mean.median_sdr_db:.2f} dB ({mean.median_improvement_db:+.2f} dB)")
        results.append(result)
    return results
