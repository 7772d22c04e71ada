import os
from typing import List, Optional, Tuple

import soundfile as sf

from ..errors import EmptyDatasetError, InvalidArgumentError
from ..output import output
from .types import AudioBuffer, DatasetItem, DatasetLayout
from .wav import read_wav

MIXTURE_FILE = "mixture.wav"
TARGET_FILE = "vocals.wav"


def _check_pair(track_dir: str) -> Tuple[Optional[DatasetItem], Optional[str]]:
    mixture_path = os.path.join(track_dir, MIXTURE_FILE)
    target_path = os.path.join(track_dir, TARGET_FILE)
    for path in (mixture_path, target_path):
        if not os.path.isfile(path):
            return None, f"missing {os.path.basename(path)}"

    try:
        mix_info = sf.info(mixture_path)
        tgt_info = sf.info(target_path)
    except RuntimeError as e:
        return None, f"unreadable audio ({e})"

    if mix_info.samplerate != tgt_info.samplerate:
        return None, f"sample rate mismatch ({mix_info.samplerate} vs {tgt_info.samplerate})"
    if mix_info.channels != tgt_info.channels:
        return None, f"channel count mismatch ({mix_info.channels} vs {tgt_info.channels})"
    if abs(mix_info.frames - tgt_info.frames) > 1:
        return None, f"length mismatch ({mix_info.frames} vs {tgt_info.frames} frames)"
    frames = min(mix_info.frames, tgt_info.frames)
    if frames < 1:
        return None, "empty audio"

    return DatasetItem(
        name=os.path.basename(track_dir),
        mixture_path=mixture_path,
        target_path=target_path,
        duration=frames / mix_info.samplerate,
        sample_rate=mix_info.samplerate,
        channels=mix_info.channels,
        frames=frames,
    ), None


def scan_dataset(root_dir: str, layout: DatasetLayout = DatasetLayout.PAIRED_SUBDIRS) -> List[DatasetItem]:
    """
    Collects `<root>/<track>/{mixture.wav, vocals.wav}` pairs in lexicographic order.

    Tracks that fail a pairing check are reported as warnings and skipped.
    """
    if layout != DatasetLayout.PAIRED_SUBDIRS:
        raise InvalidArgumentError(f"Unsupported dataset layout: {layout}")
    if not os.path.isdir(root_dir):
        raise EmptyDatasetError(f"Dataset directory not found: {root_dir}")

    items = []
    for name in sorted(os.listdir(root_dir)):
        track_dir = os.path.join(root_dir, name)
        if not os.path.isdir(track_dir):
            continue
        item, problem = _check_pair(track_dir)
        if item is None:
            output("warning", f"Skipping track '{name}': {problem}")
            continue
        items.append(item)

    if not items:
        raise EmptyDatasetError(f"No valid tracks found in {root_dir}")
    return items


def load_item(item: DatasetItem, channels: Optional[int] = None, start: int = 0,
              frames: Optional[int] = None) -> Tuple[AudioBuffer, AudioBuffer]:
    """Reads the (mixture, vocals) pair, trimmed to the shared length."""
    if frames is None:
        frames = item.frames - start
    mixture = read_wav(item.mixture_path, channels=channels, start=start, frames=frames)
    target = read_wav(item.target_path, channels=channels, start=start, frames=frames)
    length = min(mixture.length, target.length)
    return (mixture.with_samples(mixture.samples[:, :length]),
            target.with_samples(target.samples[:, :length]))
