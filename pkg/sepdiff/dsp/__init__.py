from .types import BiquadSection, BiquadCascade, ChunkPlan
from .filters import (design_butterworth_hp, apply_filter, magnitude_db, noise_power_gain,
                      normalized_filtered_noise)
from .chunking import chunk_and_process, chunk_count, chunk_starts, crossfade_ramps

__all__ = ['BiquadSection', 'BiquadCascade', 'ChunkPlan', 'design_butterworth_hp', 'apply_filter',
           'magnitude_db', 'noise_power_gain', 'normalized_filtered_noise', 'chunk_and_process',
           'chunk_count', 'chunk_starts', 'crossfade_ramps']
