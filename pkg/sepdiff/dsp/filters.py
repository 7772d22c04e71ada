from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import signal

from ..audio import AudioBuffer
from ..errors import InvalidArgumentError, NumericFailureError
from .types import BiquadCascade, BiquadSection

SUPPORTED_ORDERS = (2, 4)
GAIN_TAIL_TOLERANCE = 1e-9
GAIN_MAX_SAMPLES = 1_000_000
_GAIN_BLOCK = 4096


@lru_cache(maxsize=64)
def _design_sos(cutoff_hz: float, sample_rate: int, order: int) -> Tuple[Tuple[float, ...], ...]:
    # scipy prewarps the cutoff when fs is given, so |H(f_c)| is exactly -3.01 dB
    sos = signal.butter(order, cutoff_hz, btype="highpass", fs=sample_rate, output="sos")
    return tuple(tuple(float(c) for c in row) for row in sos)


def design_butterworth_hp(cutoff_hz: float, sample_rate: int, order: int = 4) -> BiquadCascade:
    """Butterworth high-pass as a cascade of order/2 biquads (bilinear transform)."""
    if order not in SUPPORTED_ORDERS:
        raise InvalidArgumentError(f"Filter order must be one of {SUPPORTED_ORDERS}, got {order}")
    if not 0 < cutoff_hz < sample_rate / 2:
        raise InvalidArgumentError(
            f"Cutoff {cutoff_hz} Hz must lie strictly between 0 and Nyquist ({sample_rate / 2} Hz)")

    rows = _design_sos(float(cutoff_hz), int(sample_rate), int(order))
    sections = tuple(
        BiquadSection(b0=b0 / a0, b1=b1 / a0, b2=b2 / a0, a1=a1 / a0, a2=a2 / a0)
        for b0, b1, b2, a0, a1, a2 in rows
    )
    return BiquadCascade(sections=sections, sample_rate=int(sample_rate), cutoff_hz=float(cutoff_hz))


def magnitude_db(filt: BiquadCascade, frequencies_hz: Sequence[float]) -> np.ndarray:
    """Gain of the designed filter on the unit circle, in dB."""
    _, response = signal.sosfreqz(filt.sos, worN=np.asarray(frequencies_hz, dtype=np.float64),
                                  fs=filt.sample_rate)
    return 20.0 * np.log10(np.maximum(np.abs(response), 1e-300))


def apply_filter(filt: BiquadCascade, x: AudioBuffer) -> AudioBuffer:
    """Causal per-channel filtering from a zero initial state."""
    if x.sample_rate != filt.sample_rate:
        raise InvalidArgumentError(
            f"Filter designed for {filt.sample_rate} Hz applied to {x.sample_rate} Hz audio")
    y = signal.sosfilt(filt.sos, x.samples.astype(np.float64), axis=-1)
    return x.with_samples(y)


@lru_cache(maxsize=64)
def _noise_power_gain(rows: Tuple[Tuple[float, ...], ...]) -> float:
    sos = np.array(rows, dtype=np.float64)
    zi = np.zeros((sos.shape[0], 2))
    block = np.zeros(_GAIN_BLOCK)
    block[0] = 1.0
    total = 0.0
    consumed = 0
    while consumed < GAIN_MAX_SAMPLES:
        h, zi = signal.sosfilt(sos, block, zi=zi)
        tail = float(np.sum(h * h))
        total += tail
        consumed += _GAIN_BLOCK
        block = np.zeros(_GAIN_BLOCK)
        if total > 0 and tail < GAIN_TAIL_TOLERANCE * total:
            return total
    raise NumericFailureError(f"Impulse response energy did not converge within {GAIN_MAX_SAMPLES} samples")


def noise_power_gain(filt: BiquadCascade) -> float:
    """Sum of h[n]^2 over the impulse response; the variance gain for white noise."""
    return _noise_power_gain(tuple(section.as_sos_row() for section in filt.sections))


def normalized_filtered_noise(filt: Optional[BiquadCascade], shape: Tuple[int, ...],
                              rng: np.random.Generator, sample_rate: Optional[int] = None) -> AudioBuffer:
    """
    Unit Gaussian noise, high-passed by `filt` and divided by sqrt(noise power gain).

    Without a filter the raw noise is returned. `shape` is (channels, length).
    """
    if filt is None and sample_rate is None:
        raise InvalidArgumentError("Unfiltered noise needs an explicit sample rate")
    rate = filt.sample_rate if filt is not None else sample_rate

    noise = rng.standard_normal(shape)
    if filt is not None:
        noise = signal.sosfilt(filt.sos, noise, axis=-1) / np.sqrt(noise_power_gain(filt))
    return AudioBuffer(noise, rate)
