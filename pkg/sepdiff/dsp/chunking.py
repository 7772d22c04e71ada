import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Tuple

import numpy as np

from ..audio import AudioBuffer
from ..errors import ContractViolationError
from .types import ChunkPlan

ChunkFn = Callable[[AudioBuffer, int], AudioBuffer]


def chunk_count(length: int, plan: ChunkPlan) -> int:
    if length <= plan.chunk_len:
        return 1
    return math.ceil((length - plan.chunk_len) / plan.hop) + 1


def chunk_starts(length: int, plan: ChunkPlan) -> List[int]:
    return [i * plan.hop for i in range(chunk_count(length, plan))]


def crossfade_ramps(overlap_len: int) -> Tuple[np.ndarray, np.ndarray]:
    """Linear (fade_in, fade_out) over the overlap; they sum to 1 sample by sample."""
    fade_in = (np.arange(overlap_len, dtype=np.float64) + 0.5) / max(overlap_len, 1)
    return fade_in, 1.0 - fade_in


def _chunk_weights(index: int, count: int, plan: ChunkPlan) -> np.ndarray:
    weights = np.ones(plan.chunk_len, dtype=np.float64)
    ov = plan.overlap_len
    if ov == 0:
        return weights
    fade_in, fade_out = crossfade_ramps(ov)
    if index > 0:
        weights[:ov] = fade_in
    if index < count - 1:
        weights[-ov:] = fade_out
    return weights


def chunk_and_process(x: AudioBuffer, plan: ChunkPlan, process: ChunkFn,
                      workers: int = 1, on_chunk_done: Optional[Callable[[int], None]] = None) -> AudioBuffer:
    """
    Splits `x` into overlapping chunks, runs `process(chunk, index)` on each and
    overlap-adds the results with a linear crossfade.

    The tail is zero-padded to a whole chunk and trimmed off again. With workers > 1
    chunks run on a thread pool; recombination order does not depend on completion order.
    """
    length = x.length
    count = chunk_count(length, plan)
    padded_len = (count - 1) * plan.hop + plan.chunk_len
    padded = np.zeros((x.channels, padded_len), dtype=np.float32)
    padded[:, :length] = x.samples
    starts = chunk_starts(length, plan)

    def run(index: int) -> np.ndarray:
        start = starts[index]
        chunk = x.with_samples(padded[:, start:start + plan.chunk_len])
        result = process(chunk, index)
        if not isinstance(result, AudioBuffer) or result.shape != chunk.shape:
            got = result.shape if isinstance(result, AudioBuffer) else type(result).__name__
            raise ContractViolationError(
                f"Chunk {index}: processing returned {got}, expected shape {chunk.shape}")
        if on_chunk_done is not None:
            on_chunk_done(index)
        return result.samples

    if workers > 1 and count > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(count)))
    else:
        results = [run(i) for i in range(count)]

    out = np.zeros((x.channels, padded_len), dtype=np.float64)
    for index, (start, y) in enumerate(zip(starts, results)):
        out[:, start:start + plan.chunk_len] += _chunk_weights(index, count, plan) * y.astype(np.float64)
    return x.with_samples(out[:, :length])
