import os
from concurrent.futures import ThreadPoolExecutor
from typing import List, Tuple

import numpy as np
from scipy import signal
from tqdm import tqdm

from ..audio import AudioBuffer, WavFormat, write_wav
from ..audio.dataset import MIXTURE_FILE, TARGET_FILE
from ..output import is_quiet, output
from ..streams import SubStream, make_rng
from .types import SynthSpec

SPLITS = ("train", "test")
RAMP_SECONDS = 0.02
CHORD_RAMP_SECONDS = 0.05
TRIADS = ((0, 4, 7), (0, 3, 7))


def _fundamental(spec: SynthSpec, rng: np.random.Generator, frames: int) -> np.ndarray:
    """Random walk over notes in log frequency, gliding between notes, plus vibrato."""
    note_len = max(1, int(round(spec.note_seconds * spec.sample_rate)))
    notes = frames // note_len + 2
    low, high = np.log2(spec.f0_min_hz), np.log2(spec.f0_max_hz)
    steps = rng.normal(0.0, spec.f0_step_semitones / 12.0, size=notes)
    steps[0] = rng.uniform(low, high)
    pitch = np.empty(notes)
    current = 0.0
    for i, step in enumerate(steps):
        current = step if i == 0 else current + step
        # reflect at the range edges
        if current > high:
            current = 2 * high - current
        if current < low:
            current = 2 * low - current
        current = float(np.clip(current, low, high))
        pitch[i] = current
    positions = np.arange(notes) * note_len
    log_f0 = np.interp(np.arange(frames), positions, pitch)

    t = np.arange(frames) / spec.sample_rate
    vibrato_phase = rng.uniform(0, 2 * np.pi)
    cents = spec.vibrato_depth_cents * np.sin(2 * np.pi * spec.vibrato_rate_hz * t + vibrato_phase)
    return 2.0 ** (log_f0 + cents / 1200.0)


def _split_lengths(rng: np.random.Generator, total: int, parts: int) -> np.ndarray:
    lengths = np.floor(rng.dirichlet(np.ones(parts)) * total).astype(int)
    lengths[-1] += total - lengths.sum()
    return lengths


def _ramp_window(length: int, ramp: int) -> np.ndarray:
    window = np.ones(length)
    ramp = min(ramp, length // 2)
    if ramp > 0:
        rise = 0.5 - 0.5 * np.cos(np.pi * (np.arange(ramp) + 0.5) / ramp)
        window[:ramp] = rise
        window[-ramp:] = rise[::-1]
    return window


def phrase_envelope(spec: SynthSpec, rng: np.random.Generator, frames: int) -> np.ndarray:
    """
    Phrases with raised-cosine onsets and offsets, separated by exactly silent gaps that
    together cover `silence_fraction` of the track.
    """
    phrases = max(1, int(round(spec.duration_s / spec.phrase_seconds)))
    silent = int(np.ceil(spec.silence_fraction * frames))
    gaps = _split_lengths(rng, silent, phrases + 1)
    voiced = _split_lengths(rng, frames - silent, phrases)
    ramp = int(round(RAMP_SECONDS * spec.sample_rate))

    envelope = np.zeros(frames)
    position = gaps[0]
    for length, gap in zip(voiced, gaps[1:]):
        envelope[position:position + length] = _ramp_window(length, ramp)
        position += length + gap
    return envelope


def render_voice(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    frames = spec.frames
    f0 = _fundamental(spec, rng, frames)
    phase = 2 * np.pi * np.cumsum(f0) / spec.sample_rate
    limit = 0.45 * spec.sample_rate
    offsets = rng.uniform(0, 2 * np.pi, size=(spec.channels, spec.partials))

    voice = np.zeros((spec.channels, frames))
    for k in range(1, spec.partials + 1):
        # partials fade out smoothly as they approach Nyquist
        gain = np.clip((limit - k * f0) / (0.05 * spec.sample_rate), 0.0, 1.0) / k
        if not np.any(gain):
            break
        voice += gain * np.sin(k * phase + offsets[:, k - 1:k])
    return voice * phrase_envelope(spec, rng, frames)


def _unit_rms(x: np.ndarray) -> np.ndarray:
    rms = np.sqrt(np.mean(x * x))
    return x / rms if rms > 0 else x


def render_accompaniment(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    frames = spec.frames
    nyquist = spec.sample_rate / 2
    low, high = spec.noise_band_hz
    high = min(high, 0.9 * nyquist)
    low = min(low, 0.5 * high)
    sos = signal.butter(4, [low, high], btype="bandpass", fs=spec.sample_rate, output="sos")
    noise = signal.sosfilt(sos, rng.standard_normal((spec.channels, frames)), axis=1)

    pad = np.zeros((spec.channels, frames))
    chord_len = max(1, int(round(spec.chord_seconds * spec.sample_rate)))
    ramp = int(round(CHORD_RAMP_SECONDS * spec.sample_rate))
    t = np.arange(chord_len) / spec.sample_rate
    for start in range(0, frames, chord_len):
        stop = min(start + chord_len, frames)
        root = 2.0 ** rng.uniform(np.log2(100.0), np.log2(300.0))
        intervals = TRIADS[rng.integers(len(TRIADS))]
        phases = rng.uniform(0, 2 * np.pi, size=(spec.channels, 3, 3))
        chord = np.zeros((spec.channels, chord_len))
        for n, semitones in enumerate(intervals):
            f = root * 2.0 ** (semitones / 12.0)
            for h, amp in enumerate((1.0, 0.5, 0.25)):
                if (h + 1) * f < 0.45 * spec.sample_rate:
                    chord += amp * np.sin(2 * np.pi * (h + 1) * f * t + phases[:, n, h:h + 1])
        pad[:, start:stop] = (chord * _ramp_window(chord_len, ramp))[:, :stop - start]

    return spec.noise_gain * _unit_rms(noise) + spec.pad_gain * _unit_rms(pad)


def render_track(spec: SynthSpec, split: int, index: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(vocals, accompaniment, mixture) as float32 with mixture = vocals + accompaniment."""
    rng = make_rng(spec.seed, SubStream.SYNTHESIS, split, index)
    vocals = render_voice(spec, rng)
    accompaniment = render_accompaniment(spec, rng)

    snr_db = rng.uniform(spec.snr_db_min, spec.snr_db_max)
    ratio = np.sum(vocals ** 2) / (np.sum(accompaniment ** 2) * 10.0 ** (snr_db / 10.0))
    accompaniment *= np.sqrt(ratio)

    gain = 10.0 ** (spec.peak_dbfs / 20.0) / np.max(np.abs(vocals + accompaniment))
    vocals = (vocals * gain).astype(np.float32)
    accompaniment = (accompaniment * gain).astype(np.float32)
    return vocals, accompaniment, vocals + accompaniment


def _write_track(spec: SynthSpec, root: str, split: int, index: int) -> str:
    track_dir = os.path.join(root, SPLITS[split], f"track_{index:03d}")
    vocals, _, mixture = render_track(spec, split, index)
    write_wav(os.path.join(track_dir, MIXTURE_FILE), AudioBuffer(mixture, spec.sample_rate), WavFormat.FLOAT32)
    write_wav(os.path.join(track_dir, TARGET_FILE), AudioBuffer(vocals, spec.sample_rate), WavFormat.FLOAT32)
    return track_dir


def synthesize(spec: SynthSpec, out_dir: str, workers: int = 1) -> List[str]:
    """Writes <out>/train/track_NNN and <out>/test/track_NNN pairs; returns the track dirs."""
    jobs = [(0, i) for i in range(spec.track_count)] + [(1, i) for i in range(spec.test_track_count)]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = [pool.submit(_write_track, spec, out_dir, split, index) for split, index in jobs]
        dirs = [f.result() for f in tqdm(futures, desc="synth", unit="track", disable=is_quiet())]
    output("summary", f"Wrote {spec.track_count} training and {spec.test_track_count} test tracks "
                      f"({spec.duration_s:g} s, {spec.sample_rate} Hz) to {out_dir}")
    return dirs
