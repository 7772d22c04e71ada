import dataclasses
import threading
from typing import Callable, Dict, List, Optional, Tuple

from ..audio import AudioBuffer
from ..dsp import ChunkPlan, chunk_and_process
from ..streams import derive_seed
from .sampler import sample
from .types import Denoiser, SamplerConfig, StepDiagnostics

ChunkTraces = Dict[int, List[StepDiagnostics]]


def chunk_config(cfg: SamplerConfig, chunk_index: int) -> SamplerConfig:
    """Sampler config for one chunk; its seed depends only on (seed, chunk index)."""
    return dataclasses.replace(cfg, seed=derive_seed(cfg.seed, chunk_index))


def separate(mixture: AudioBuffer, denoiser: Denoiser, cfg: SamplerConfig, plan: ChunkPlan,
             workers: int = 1, on_chunk_done: Optional[Callable[[int], None]] = None) -> Tuple[AudioBuffer, ChunkTraces]:
    """Chunked sampling with overlap-add; returns the estimate and per-chunk step traces."""
    traces: ChunkTraces = {}
    lock = threading.Lock()

    def process(chunk: AudioBuffer, index: int) -> AudioBuffer:
        estimate, trace = sample(chunk, denoiser, chunk_config(cfg, index))
        with lock:
            traces[index] = trace
        return estimate

    estimate = chunk_and_process(mixture, plan, process, workers=workers, on_chunk_done=on_chunk_done)
    return estimate, dict(sorted(traces.items()))


TRACE_HEADER = ["chunk", "t", "sigma", "delta", "beta_prime", "x0_rms"]


def trace_rows(traces: ChunkTraces) -> List[list]:
    return [[chunk, d.t, d.sigma, d.delta, d.beta_prime, d.x0_estimate_rms]
            for chunk, trace in traces.items() for d in trace]
