import zlib
from enum import Enum

import numpy as np

_MASK64 = (1 << 64) - 1


class SubStream(Enum):
    INIT = "init"
    SAMPLING = "sampling"
    REFINEMENT = "refinement"
    TRAINING = "training"
    AUGMENTATION = "augmentation"
    SYNTHESIS = "synthesis"


def _stream_key(stream: SubStream) -> int:
    return zlib.crc32(stream.value.encode("utf-8"))


def make_rng(seed: int, stream: SubStream, *indices: int) -> np.random.Generator:
    """Counter-based Philox generator for one named purpose of a run seed.

    Gaussian variates are drawn with numpy's ziggurat `standard_normal`, so a stream
    reproduces bit-for-bit on every platform numpy supports.
    """
    entropy = [int(seed) & _MASK64, _stream_key(stream), *(int(i) for i in indices)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def derive_seed(seed: int, *indices: int) -> int:
    """Child seed for (seed, indices), e.g. one per separated chunk."""
    sequence = np.random.SeedSequence([int(seed) & _MASK64, *(int(i) for i in indices)])
    return int(sequence.generate_state(1, dtype=np.uint64)[0] & ((1 << 63) - 1))
