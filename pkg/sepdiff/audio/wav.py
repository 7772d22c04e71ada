import os
import struct
from typing import Optional

import numpy as np
import soundfile as sf

from ..errors import AudioIOError, CorruptFileError, InvalidArgumentError, UnsupportedFormatError
from ..fileio import atomic_path
from .types import AudioBuffer, WavFormat

SUPPORTED_SUBTYPES = ("PCM_16", "PCM_24", "FLOAT")
PCM16_SCALE = 32768.0


def _looks_like_riff(path: str) -> bool:
    with open(path, "rb") as f:
        header = f.read(12)
    return len(header) >= 12 and header[:4] == b"RIFF" and header[8:12] == b"WAVE"


def _check_riff_length(path: str):
    """The RIFF size field must not promise more bytes than the file holds."""
    with open(path, "rb") as f:
        header = f.read(8)
    declared = struct.unpack("<I", header[4:8])[0] + 8
    actual = os.path.getsize(path)
    if actual < declared:
        raise CorruptFileError(f"Truncated WAV file {path}: header declares {declared} bytes, found {actual}")


def read_wav(path: str, channels: Optional[int] = None, start: int = 0,
             frames: Optional[int] = None) -> AudioBuffer:
    """
    Reads a PCM 16/24-bit or 32-bit float WAV file.

    Integer formats are scaled to [-1, 1). A mono file is duplicated when `channels`
    asks for more; any other channel mismatch is an error. `start`/`frames` read a
    segment without loading the whole file.
    """
    if not os.path.isfile(path):
        raise AudioIOError(f"Audio file not found: {path}")

    try:
        info = sf.info(path)
    except RuntimeError as e:
        if _looks_like_riff(path):
            raise CorruptFileError(f"Corrupt WAV file {path}: {e}")
        raise UnsupportedFormatError(f"Unsupported audio container for {path}: {e}")

    if info.format not in ("WAV", "WAVEX"):
        raise UnsupportedFormatError(f"Unsupported container {info.format} for {path}; expected WAV")
    if info.subtype not in SUPPORTED_SUBTYPES:
        raise UnsupportedFormatError(
            f"Unsupported WAV codec {info.subtype} for {path}; expected one of {', '.join(SUPPORTED_SUBTYPES)}")
    _check_riff_length(path)

    stop = None if frames is None else start + frames
    try:
        data, sample_rate = sf.read(path, start=start, stop=stop, dtype="float32", always_2d=True)
    except RuntimeError as e:
        raise CorruptFileError(f"Corrupt WAV file {path}: {e}")

    if data.shape[0] == 0:
        raise CorruptFileError(f"WAV file {path} holds no audio frames in the requested range")

    samples = np.ascontiguousarray(data.T)
    if channels is not None and samples.shape[0] != channels:
        if samples.shape[0] == 1:
            samples = np.repeat(samples, channels, axis=0)
        else:
            raise InvalidArgumentError(f"{path} has {samples.shape[0]} channels, expected {channels}")
    return AudioBuffer(samples, sample_rate)


def quantize_pcm16(samples: np.ndarray) -> np.ndarray:
    """Clamps to the representable range and rounds to int16 (-1.0 maps to -32768)."""
    scaled = np.round(np.asarray(samples, dtype=np.float64) * PCM16_SCALE)
    return np.clip(scaled, -32768, 32767).astype(np.int16)


def write_wav(path: str, buffer: AudioBuffer, format: WavFormat = WavFormat.FLOAT32):
    """Writes atomically; pcm16 clamps to [-1, 1 - 2^-15], float32 stores values as-is."""
    if format == WavFormat.PCM16:
        data, subtype = quantize_pcm16(buffer.samples).T, "PCM_16"
    elif format == WavFormat.FLOAT32:
        data, subtype = buffer.samples.astype(np.float32).T, "FLOAT"
    else:
        raise InvalidArgumentError(f"Unsupported WAV format: {format}")

    try:
        with atomic_path(path) as tmp:
            sf.write(tmp, np.ascontiguousarray(data), buffer.sample_rate, subtype=subtype, format="WAV")
    except (OSError, RuntimeError) as e:
        raise AudioIOError(f"Failed to write {path}: {e}")
